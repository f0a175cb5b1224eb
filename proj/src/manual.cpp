#include "warnbench/manual.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "warnbench/error.hpp"
#include "warnbench/text.hpp"

namespace warnbench {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(path + "." + key + ": missing field");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) {
    throw ParseError(path + "." + key + ": expected a string");
  }
  return v.get<std::string>();
}

Warning parse_warning(const json& j, const std::string& path) {
  Warning w;
  w.id = require_string(j, "id", path);
  w.text = require_string(j, "text", path);
  if (w.id.empty()) throw ValidationError(path + ".id: must not be empty");
  if (text::trim(w.text).empty()) {
    throw ValidationError(path + ".text: must not be empty");
  }
  if (auto it = j.find("keywords"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw ParseError(path + ".keywords: expected an array of strings");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& k = (*it)[i];
      if (!k.is_string()) {
        throw ParseError(path + ".keywords[" + std::to_string(i) +
                         "]: expected a string");
      }
      auto kw = text::trim(k.get<std::string>());
      if (!kw.empty()) w.keywords.push_back(text::to_lower(kw));
    }
  }
  if (w.keywords.empty()) w.keywords = text::content_tokens(w.text);
  return w;
}

}  // namespace

Manual manual_from_json(const json& j) {
  const std::string root = "manual";
  Manual m;
  m.id = require_string(j, "id", root);
  m.title = require_string(j, "title", root);
  if (m.id.empty()) throw ValidationError("manual.id: must not be empty");

  const auto& sections = require(j, "sections", root);
  if (!sections.is_array()) {
    throw ParseError("manual.sections: expected an array");
  }
  if (sections.empty()) {
    throw ValidationError("manual.sections: at least one section is required");
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const std::string path = "manual.sections[" + std::to_string(i) + "]";
    const auto& s = sections[i];
    ComponentSection sec;
    sec.name = require_string(s, "name", path);
    if (text::trim(sec.name).empty()) {
      throw ValidationError(path + ".name: must not be empty");
    }
    if (auto it = s.find("description"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ParseError(path + ".description: expected a string");
      }
      sec.description = it->get<std::string>();
    }
    if (auto it = s.find("warnings"); it != s.end() && !it->is_null()) {
      if (!it->is_array()) {
        throw ParseError(path + ".warnings: expected an array");
      }
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string wpath = path + ".warnings[" + std::to_string(k) + "]";
        auto w = parse_warning((*it)[k], wpath);
        if (!seen.insert(w.id).second) {
          throw ValidationError(wpath + ".id: duplicate warning id \"" + w.id +
                                "\"");
        }
        sec.warnings.push_back(std::move(w));
      }
    }
    m.sections.push_back(std::move(sec));
  }
  if (seen.empty()) {
    throw ValidationError("manual: at least one warning is required");
  }
  return m;
}

Manual parse_manual(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manual: malformed document: ") + e.what());
  }
  return manual_from_json(j);
}

Manual load_manual(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manual file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_manual(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json manual_to_json(const Manual& manual) {
  json sections = json::array();
  for (const auto& s : manual.sections) {
    json warnings = json::array();
    for (const auto& w : s.warnings) {
      warnings.push_back(
          {{"id", w.id}, {"text", w.text}, {"keywords", w.keywords}});
    }
    sections.push_back({{"name", s.name},
                        {"description", s.description},
                        {"warnings", std::move(warnings)}});
  }
  return {{"id", manual.id},
          {"title", manual.title},
          {"sections", std::move(sections)}};
}

std::string serialize_manual(const Manual& manual) {
  return manual_to_json(manual).dump(2);
}

std::vector<SectionWarning> all_warnings(const Manual& manual) {
  std::vector<SectionWarning> out;
  for (const auto& s : manual.sections) {
    for (const auto& w : s.warnings) out.push_back({&s, &w});
  }
  return out;
}

std::size_t total_warnings(const Manual& manual) {
  std::size_t n = 0;
  for (const auto& s : manual.sections) n += s.warnings.size();
  return n;
}

const Warning* find_warning(const Manual& manual, std::string_view id) {
  for (const auto& s : manual.sections) {
    for (const auto& w : s.warnings) {
      if (w.id == id) return &w;
    }
  }
  return nullptr;
}

const ComponentSection* find_section_of(const Manual& manual,
                                        std::string_view warning_id) {
  for (const auto& s : manual.sections) {
    for (const auto& w : s.warnings) {
      if (w.id == warning_id) return &s;
    }
  }
  return nullptr;
}

WarningKey key_of(const Manual& manual, const Warning& warning) {
  return {manual.id, warning.id};
}

}  // namespace warnbench
