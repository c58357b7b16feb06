#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bacforge/code_io.hpp"
#include "bacforge/code_model.hpp"
#include "bacforge/random_affine.hpp"
#include "bacforge/verifier.hpp"

namespace bacforge {

using Planner = std::function<std::optional<RecoveryPlan>(const BatchRequest&)>;

/// Exact search; keeps its memo across calls.
Planner exhaustive_planner(const CodeSpec& code, ResponseModel model);
/// Construction-specific planner chosen from the document's provenance
/// (cyclic, goodvec or affine). Throws std::invalid_argument otherwise.
Planner certified_planner(const CodeDocument& doc);

/// Re-derives the affine code recorded in the provenance and checks it matches doc.code.
AffinePlaneCode rebuild_affine(const CodeDocument& doc);

struct NodeState {
  FVector values;
  std::size_t response_count = 0;
  std::size_t symbols_read = 0;  // cumulative nonzeros over all responses
};

struct SimReport {
  BatchRequest request;
  ResponseModel model = ResponseModel::Linear;
  std::vector<Residue> recovered;
  std::vector<Residue> node_responses;       // the single field element each node sent
  std::vector<std::size_t> symbols_read;     // per node, this batch
  std::vector<std::size_t> loads;            // per node, responses this batch (always 1)
  std::size_t max_load = 0;
  double mean_load = 0;
};

/// In-process nodes holding one encoded data vector.
class Cluster {
 public:
  Cluster(const CodeSpec& code, const FVector& data);

  /// Throws std::runtime_error when the planner has no plan, std::logic_error on any
  /// broken invariant (uncertified plan, double response, wrong recovered value).
  SimReport serve(const BatchRequest& request, const Planner& planner, ResponseModel model);

  const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
  const FVector& data() const noexcept { return data_; }

 private:
  const CodeSpec* code_;
  FVector data_;
  std::vector<NodeState> nodes_;
};

SimReport serve_batch(const CodeSpec& code, const FVector& data, const BatchRequest& request,
                      const Planner& planner, ResponseModel model);

struct LoadStats {
  std::size_t batches = 0;
  std::vector<std::size_t> responses;  // per node
  std::size_t max_load = 0;
  double mean_load = 0;
  std::size_t max_symbols_read = 0;
  std::map<std::size_t, std::size_t> symbols_read_histogram;  // reads per response -> count
};
LoadStats load_stats(const std::vector<SimReport>& reports);

struct ComparisonRow {
  BatchRequest request;
  std::size_t linear_max_read = 0, projection_max_read = 0;
  std::size_t linear_total_read = 0, projection_total_read = 0;
};
struct ModelComparison {
  std::size_t linear_length = 0, projection_length = 0;
  std::vector<ComparisonRow> rows;
  LoadStats linear, projection;
};
/// Serves every request on both codes (exhaustive planners) with a fixed data vector
/// x_i = i+1 mod p; the second code runs under the projection-only model.
ModelComparison compare_models(const CodeSpec& code_linear, const CodeSpec& code_projection,
                               const std::vector<BatchRequest>& requests);

/// Rows "request,node,load,symbols_read" with 1-based, space-separated requests.
std::string sweep_csv(const std::vector<SimReport>& reports);

}  // namespace bacforge
