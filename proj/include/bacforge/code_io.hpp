#pragma once

#include <string>

#include <json.hpp>

#include "bacforge/code_model.hpp"
#include "bacforge/verifier.hpp"

namespace bacforge {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCodeFormat = "bacforge-code-v1";

/// A code plus the construction parameters it came from (null when unknown).
struct CodeDocument {
  CodeSpec code;
  Json provenance;
};

Json code_to_json(const CodeDocument& doc);
/// Compact single-line serialization; parse(serialize(d)) re-serializes identically.
std::string serialize_code(const CodeDocument& doc);
/// Throws std::invalid_argument on any format violation (unknown keys included).
CodeDocument parse_code(const std::string& text);
CodeDocument load_code(const std::string& path);
void save_code(const CodeDocument& doc, const std::string& path);

Json request_to_json(const BatchRequest& request);  // 1-based
Json report_to_json(const VerificationReport& report);

}  // namespace bacforge
