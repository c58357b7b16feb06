#include "bacforge/code_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bacforge {

Json code_to_json(const CodeDocument& doc) {
  const auto& code = doc.code;
  Json j;
  j["format"] = kCodeFormat;
  j["p"] = code.field().modulus();
  j["n"] = code.n();
  Json buckets = Json::array();
  for (const auto& bucket : code.buckets()) {
    Json cols = Json::array();
    for (const auto& col : bucket) cols.push_back(Json(std::vector<Residue>(col.begin(), col.end())));
    buckets.push_back(std::move(cols));
  }
  j["buckets"] = std::move(buckets);
  if (!doc.provenance.is_null()) j["provenance"] = doc.provenance;
  return j;
}

std::string serialize_code(const CodeDocument& doc) { return code_to_json(doc).dump() + "\n"; }

CodeDocument parse_code(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("code file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("code file must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "format" && key != "p" && key != "n" && key != "buckets" && key != "provenance") {
      throw std::invalid_argument("unknown key '" + key + "' in code file");
    }
  }
  if (!j.contains("format") || j["format"] != kCodeFormat) {
    throw std::invalid_argument(std::string("code file format must be \"") + kCodeFormat + "\"");
  }
  if (!j.contains("p") || !j["p"].is_number_unsigned()) throw std::invalid_argument("code file needs an unsigned \"p\"");
  if (!j.contains("n") || !j["n"].is_number_unsigned()) throw std::invalid_argument("code file needs an unsigned \"n\"");
  if (!j.contains("buckets") || !j["buckets"].is_array()) throw std::invalid_argument("code file needs a \"buckets\" array");

  const PrimeField field(j["p"].get<std::uint32_t>());
  const auto n = j["n"].get<std::size_t>();
  std::vector<Bucket> buckets;
  for (const auto& b : j["buckets"]) {
    if (!b.is_array()) throw std::invalid_argument("each bucket must be an array of columns");
    Bucket bucket;
    for (const auto& col : b) {
      if (!col.is_array() || col.size() != n) throw std::invalid_argument("each column must be an array of n entries");
      std::vector<Residue> entries;
      for (const auto& e : col) {
        if (!e.is_number_unsigned() || e.get<std::uint64_t>() >= field.modulus()) {
          throw std::invalid_argument("column entries must be integers in [0, p)");
        }
        entries.push_back(e.get<Residue>());
      }
      bucket.emplace_back(field, std::move(entries));
    }
    buckets.push_back(std::move(bucket));
  }
  Json provenance = j.contains("provenance") ? j["provenance"] : Json();
  return CodeDocument{CodeSpec(field, n, std::move(buckets)), std::move(provenance)};
}

CodeDocument load_code(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read code file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_code(buf.str());
}

void save_code(const CodeDocument& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << serialize_code(doc);
}

Json request_to_json(const BatchRequest& request) {
  Json arr = Json::array();
  for (auto i : request.indices) arr.push_back(i + 1);
  return arr;
}

Json report_to_json(const VerificationReport& report) {
  Json j;
  j["status"] = report.passed() ? "pass" : "fail";
  j["checked"] = report.total_requests;
  Json failures = Json::array();
  for (const auto& f : report.failures) {
    Json item;
    item["request"] = request_to_json(f.request);
    item["reason"] = f.reason;
    failures.push_back(std::move(item));
  }
  j["failures"] = std::move(failures);
  return j;
}

}  // namespace bacforge
