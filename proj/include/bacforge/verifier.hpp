#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "bacforge/code_model.hpp"

namespace bacforge {

/// Sorted multiset of 0-based symbol indices.
struct BatchRequest {
  std::vector<std::size_t> indices;

  /// Sorts and range-checks against n; throws std::invalid_argument.
  static BatchRequest make(std::vector<std::size_t> indices, std::size_t n);
  std::size_t size() const noexcept { return indices.size(); }
  bool operator==(const BatchRequest&) const = default;
  auto operator<=>(const BatchRequest&) const = default;
};

enum class ResponseModel { Linear, ProjectionOnly };

/// sets[j] serves request j; responses[l] has length N_l; combos[j][a] weighs bucket sets[j][a].
struct RecoveryPlan {
  std::vector<std::vector<std::size_t>> sets;
  std::vector<FVector> responses;
  std::vector<std::vector<Residue>> combos;
};

struct VerificationFailure {
  BatchRequest request;
  std::string reason;
};

struct VerificationReport {
  std::size_t total_requests = 0;
  std::vector<VerificationFailure> failures;  // sorted by request
  std::chrono::duration<double> elapsed{};

  bool passed() const noexcept { return failures.empty(); }
};

/// Responses solving for e_{i_j} over the columns of cores[j] (a subset of sets[j]); buckets
/// outside every core answer zero. Throws std::logic_error if a core cannot recover its symbol.
RecoveryPlan realize_linear_plan(const CodeSpec& code, const BatchRequest& request,
                                 std::vector<std::vector<std::size_t>> sets,
                                 const std::vector<std::vector<std::size_t>>& cores);

/// Throws std::invalid_argument on shape mismatch; returns false for an invalid plan.
bool certify_plan(const CodeSpec& code, const BatchRequest& request, const RecoveryPlan& plan,
                  ResponseModel model);

/// Exact backtracking search for recovery partitions. Keeps a memo of recoverable symbols
/// per bucket subset, so one instance should be reused across requests on the same code.
/// Not thread-safe; give each worker its own instance.
class PlanSearch {
 public:
  PlanSearch(const CodeSpec& code, ResponseModel model);

  std::optional<RecoveryPlan> find(const BatchRequest& request);

  const CodeSpec& code() const noexcept { return *code_; }
  ResponseModel model() const noexcept { return model_; }

 private:
  using Mask = std::uint64_t;
  using Symbols = boost::dynamic_bitset<>;

  const Symbols& recoverable(Mask mask);
  Symbols compute_recoverable(Mask mask) const;
  bool search(std::size_t j, Mask remaining, Mask previous);
  bool recovers_minimally(Mask set, std::size_t symbol);
  Mask minimal_core(Mask set, std::size_t symbol);
  RecoveryPlan realize() const;
  void realize_set(Mask core, std::size_t symbol, RecoveryPlan& plan, std::size_t j) const;

  const CodeSpec* code_;
  ResponseModel model_;
  std::unordered_map<Mask, Symbols> memo_;
  // Per-call state.
  const BatchRequest* request_ = nullptr;
  std::vector<Mask> chosen_;
};

std::optional<RecoveryPlan> find_plan(const CodeSpec& code, const BatchRequest& request,
                                      ResponseModel model);

/// Advances a sorted multiset over [0, n) to its lexicographic successor; false at the end.
bool next_multiset(std::vector<std::size_t>& indices, std::size_t n);

/// jobs = 0 uses the available hardware parallelism.
VerificationReport verify_bac(const CodeSpec& code, std::size_t k, ResponseModel model,
                              unsigned jobs = 0);
VerificationReport verify_pir(const CodeSpec& code, std::size_t k, ResponseModel model,
                              unsigned jobs = 0);

bool check_subset_spanning(const CodeSpec& code, std::size_t k);

}  // namespace bacforge
