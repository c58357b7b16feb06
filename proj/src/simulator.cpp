#include "bacforge/simulator.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "bacforge/constructions.hpp"

namespace bacforge {

namespace {

std::string describe(const BatchRequest& request) {
  std::string s = "<";
  for (std::size_t j = 0; j < request.size(); ++j) s += (j ? "," : "") + std::to_string(request.indices[j] + 1);
  return s + ">";
}

std::size_t field_of(const Json& prov, const char* key) {
  const bool ok = prov.contains(key) && (prov[key].is_number_unsigned() ||
                                        (prov[key].is_number_integer() && prov[key].get<std::int64_t>() >= 0));
  if (!ok) {
    throw std::invalid_argument(std::string("provenance is missing \"") + key + "\"");
  }
  return prov[key].get<std::size_t>();
}

}  // namespace

Planner exhaustive_planner(const CodeSpec& code, ResponseModel model) {
  auto search = std::make_shared<PlanSearch>(code, model);
  return [search](const BatchRequest& r) { return search->find(r); };
}

AffinePlaneCode rebuild_affine(const CodeDocument& doc) {
  const auto& prov = doc.provenance;
  if (!prov.is_object() || prov.value("family", "") != "affine") {
    throw std::invalid_argument("code has no affine provenance");
  }
  if (prov.value("rng", "") != kAffineRngId) throw std::invalid_argument("unsupported generator id in provenance");
  if (!prov.contains("p1") || !prov.contains("p2") || !prov["p1"].is_number() || !prov["p2"].is_number()) {
    throw std::invalid_argument("provenance is missing p1/p2");
  }
  auto apc = random_bac(static_cast<std::uint32_t>(field_of(prov, "q")), field_of(prov, "k"), field_of(prov, "s"),
                        prov["p1"].get<double>(), prov["p2"].get<double>(), field_of(prov, "seed"),
                        doc.code.field());
  if (!(apc.code == doc.code)) throw std::invalid_argument("code does not match its affine provenance");
  return apc;
}

Planner certified_planner(const CodeDocument& doc) {
  const auto& prov = doc.provenance;
  const std::string family = prov.is_object() ? prov.value("family", "") : "";
  if (family == "cyclic") {
    auto params = CyclicParams::make(field_of(prov, "n"), field_of(prov, "k"), field_of(prov, "m"));
    auto code = std::make_shared<CodeSpec>(doc.code);
    return [params, code](const BatchRequest& r) -> std::optional<RecoveryPlan> {
      return cyclic_certified_plan(params, *code, r);
    };
  }
  if (family == "goodvec") {
    if (!prov.contains("v") || !prov["v"].is_array()) throw std::invalid_argument("provenance is missing \"v\"");
    auto v = GoodVector::make(prov["v"].get<std::vector<std::size_t>>());
    auto code = std::make_shared<CodeSpec>(doc.code);
    return [v, code](const BatchRequest& r) -> std::optional<RecoveryPlan> {
      return goodvec_certified_plan(v, *code, r);
    };
  }
  if (family == "affine") {
    auto apc = std::make_shared<AffinePlaneCode>(rebuild_affine(doc));
    return [apc](const BatchRequest& r) { return greedy_plan(*apc, r); };
  }
  throw std::invalid_argument("no certified planner for family '" + (family.empty() ? "unknown" : family) + "'");
}

Cluster::Cluster(const CodeSpec& code, const FVector& data) : code_(&code), data_(data) {
  const auto word = encode(code, data);
  for (const auto& v : word.values) nodes_.push_back(NodeState{v, 0, 0});
}

SimReport Cluster::serve(const BatchRequest& request, const Planner& planner, ResponseModel model) {
  const auto& code = *code_;
  const auto& field = code.field();
  const auto plan = planner(request);
  if (!plan) throw std::runtime_error("no recovery plan for request " + describe(request));
  if (!certify_plan(code, request, *plan, model)) throw std::logic_error("planner returned an uncertified plan");

  SimReport report;
  report.request = request;
  report.model = model;
  report.loads.assign(code.m(), 0);
  report.symbols_read.assign(code.m(), 0);
  report.node_responses.assign(code.m(), 0);
  // Nodes answer sequentially in bucket order; each computes one local linear combination.
  for (std::size_t l = 0; l < code.m(); ++l) {
    const auto& r = plan->responses[l];
    report.node_responses[l] = dot(nodes_[l].values, r, field);
    report.symbols_read[l] = r.nonzero_count();
    if (model == ResponseModel::ProjectionOnly && report.symbols_read[l] > 1) {
      throw std::logic_error("projection-only node read more than one symbol");
    }
  }
  for (const auto& part : plan->sets) {
    for (auto l : part) ++report.loads[l];
  }
  for (std::size_t l = 0; l < code.m(); ++l) {
    if (report.loads[l] != 1) throw std::logic_error("node " + std::to_string(l + 1) + " did not respond exactly once");
    ++nodes_[l].response_count;
    nodes_[l].symbols_read += report.symbols_read[l];
  }
  for (std::size_t j = 0; j < request.size(); ++j) {
    Residue acc = 0;
    for (std::size_t a = 0; a < plan->sets[j].size(); ++a) {
      acc = field.add(acc, field.mul(plan->combos[j][a], report.node_responses[plan->sets[j][a]]));
    }
    if (acc != data_[request.indices[j]]) throw std::logic_error("aggregator recovered a wrong value");
    report.recovered.push_back(acc);
  }
  report.max_load = 1;
  report.mean_load = 1.0;
  return report;
}

SimReport serve_batch(const CodeSpec& code, const FVector& data, const BatchRequest& request,
                      const Planner& planner, ResponseModel model) {
  Cluster cluster(code, data);
  return cluster.serve(request, planner, model);
}

LoadStats load_stats(const std::vector<SimReport>& reports) {
  LoadStats s;
  s.batches = reports.size();
  for (const auto& r : reports) {
    if (s.responses.size() < r.loads.size()) s.responses.resize(r.loads.size(), 0);
    for (std::size_t l = 0; l < r.loads.size(); ++l) {
      s.responses[l] += r.loads[l];
      ++s.symbols_read_histogram[r.symbols_read[l]];
      s.max_symbols_read = std::max(s.max_symbols_read, r.symbols_read[l]);
    }
  }
  if (!s.responses.empty()) {
    s.max_load = *std::max_element(s.responses.begin(), s.responses.end());
    std::size_t total = 0;
    for (auto v : s.responses) total += v;
    s.mean_load = double(total) / double(s.responses.size());
  }
  return s;
}

ModelComparison compare_models(const CodeSpec& code_linear, const CodeSpec& code_projection,
                               const std::vector<BatchRequest>& requests) {
  if (code_linear.n() != code_projection.n()) throw std::invalid_argument("codes must share n");
  auto data_for = [](const CodeSpec& c) {
    std::vector<std::int64_t> x(c.n());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<std::int64_t>(i + 1);
    return FVector(c.field(), x);
  };
  Cluster lin(code_linear, data_for(code_linear));
  Cluster proj(code_projection, data_for(code_projection));
  const auto lin_plan = exhaustive_planner(code_linear, ResponseModel::Linear);
  const auto proj_plan = exhaustive_planner(code_projection, ResponseModel::ProjectionOnly);

  ModelComparison out;
  out.linear_length = total_length(code_linear);
  out.projection_length = total_length(code_projection);
  std::vector<SimReport> lin_reports, proj_reports;
  for (const auto& request : requests) {
    auto a = lin.serve(request, lin_plan, ResponseModel::Linear);
    auto b = proj.serve(request, proj_plan, ResponseModel::ProjectionOnly);
    ComparisonRow row{request};
    for (auto v : a.symbols_read) {
      row.linear_max_read = std::max(row.linear_max_read, v);
      row.linear_total_read += v;
    }
    for (auto v : b.symbols_read) {
      row.projection_max_read = std::max(row.projection_max_read, v);
      row.projection_total_read += v;
    }
    out.rows.push_back(std::move(row));
    lin_reports.push_back(std::move(a));
    proj_reports.push_back(std::move(b));
  }
  out.linear = load_stats(lin_reports);
  out.projection = load_stats(proj_reports);
  return out;
}

std::string sweep_csv(const std::vector<SimReport>& reports) {
  std::ostringstream out;
  out << "request,node,load,symbols_read\n";
  for (const auto& r : reports) {
    std::string req;
    for (std::size_t j = 0; j < r.request.size(); ++j) req += (j ? " " : "") + std::to_string(r.request.indices[j] + 1);
    for (std::size_t l = 0; l < r.loads.size(); ++l) {
      out << req << ',' << l + 1 << ',' << r.loads[l] << ',' << r.symbols_read[l] << '\n';
    }
  }
  return out.str();
}

}  // namespace bacforge
