#pragma once

namespace warnbench {
inline constexpr const char* kHarnessVersion = "0.1.0";
}
