#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace warnbench {

struct Warning {
  std::string id;
  std::string text;
  // Lexical cues for the keyword judge. Filled from the content tokens of
  // `text` when the manual file omits them.
  std::vector<std::string> keywords;

  bool operator==(const Warning&) const = default;
};

struct ComponentSection {
  std::string name;
  std::string description;
  std::vector<Warning> warnings;

  bool operator==(const ComponentSection&) const = default;
};

// Immutable after load; shared read-only between pipeline stages.
struct Manual {
  std::string id;
  std::string title;
  std::vector<ComponentSection> sections;

  bool operator==(const Manual&) const = default;
};

struct SectionWarning {
  const ComponentSection* section;
  const Warning* warning;
};

// Globally resolvable key for a warning.
struct WarningKey {
  std::string manual_id;
  std::string warning_id;

  bool operator==(const WarningKey&) const = default;
  auto operator<=>(const WarningKey&) const = default;
};

// Throws ParseError for malformed documents and ValidationError when an
// invariant is broken; messages name the offending field path.
Manual load_manual(const std::filesystem::path& path);
Manual parse_manual(std::string_view document);
Manual manual_from_json(const nlohmann::json& j);

nlohmann::json manual_to_json(const Manual& manual);
std::string serialize_manual(const Manual& manual);

// Every warning exactly once, in document order. Pointers stay valid for the
// lifetime of `manual`.
std::vector<SectionWarning> all_warnings(const Manual& manual);

std::size_t total_warnings(const Manual& manual);

// nullptr when absent.
const Warning* find_warning(const Manual& manual, std::string_view id);
const ComponentSection* find_section_of(const Manual& manual,
                                        std::string_view warning_id);

WarningKey key_of(const Manual& manual, const Warning& warning);

}  // namespace warnbench
