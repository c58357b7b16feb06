#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bacforge/code_model.hpp"
#include "bacforge/verifier.hpp"

namespace bacforge {

// Simple families. All generators default to F_2; any prime works (coefficients are 0/1).

CodeSpec trivial_replication(std::size_t n, std::size_t k, PrimeField field = PrimeField(2));
/// Identity columns dealt round-robin: symbol i goes to bucket i mod m.
CodeSpec single_request_code(std::size_t n, std::size_t m, PrimeField field = PrimeField(2));
/// n = m-1 plain symbols plus one all-ones bucket.
CodeSpec parity_code_k2(std::size_t m, PrimeField field = PrimeField(2));

/// Parameters of the cyclic-shift family; make() checks k | n, k < m < 2k, (m-k) | k.
struct CyclicParams {
  std::size_t n = 0, k = 0, m = 0;

  static CyclicParams make(std::size_t n, std::size_t k, std::size_t m);
  /// P_l for l = 1..k as sorted 0-based symbol sets.
  std::vector<std::vector<std::size_t>> shift_sets() const;
  /// Symbols missing from plain bucket l (0-based, l < k); bucket l omits P_{k-l}.
  std::vector<std::size_t> omitted(std::size_t l) const;
  std::size_t block() const noexcept { return (m - k) * n / k; }

  bool operator==(const CyclicParams&) const = default;
};

CodeSpec cyclic_shift_code(const CyclicParams& params, PrimeField field = PrimeField(2));

/// Hall-matching plan: 2k-m requests on singleton buckets, the rest on one unused
/// plain bucket, paired with a sum bucket when the symbol is missing.
RecoveryPlan cyclic_certified_plan(const CyclicParams& params, const CodeSpec& code, const BatchRequest& request);

/// Requires k(k+1) | n. Bucket l interleaves k+1 shifted copies of the cyclic (n/(k+1), k, k+1) code.
CodeSpec uniform_code(std::size_t n, std::size_t k, PrimeField field = PrimeField(2));

struct GoodVector {
  std::size_t t = 0;
  std::vector<std::size_t> entries;
  /// last_occurrence[j] = max{i : v_i = j}, 1-based; index 0 unused.
  std::vector<std::size_t> last_occurrence;

  /// Validates and derives t = max entry. Throws std::invalid_argument if not good.
  static GoodVector make(std::vector<std::size_t> entries);
};

bool is_good_vector(std::span<const std::size_t> v, std::size_t t);
/// Exhaustive backtracking; result is in lexicographic order. len must be 2t or 2t+1.
std::vector<std::vector<std::size_t>> enumerate_good_vectors(std::size_t t, std::size_t len);
GoodVector good_vector_2t1(std::size_t t);

/// n = 4t+1 (|v| = 2t) or 4t+2; bucket i = (x_i, y_{i,1}, ..., y_{i,t}).
CodeSpec good_vector_code(const GoodVector& v, PrimeField field = PrimeField(2));
std::size_t good_vector_code_length(const GoodVector& v) noexcept;

struct BatchThreshold {
  std::size_t k;            // largest k with 2k <= 2t + D + ceil(k/D) for all D in [k]
  std::size_t closed_form;  // floor((sqrt(t + 1/4) + 1/2)^2), sufficient only
};
BatchThreshold max_batch_k(std::size_t t);

/// The 2t+1 pairwise-disjoint recovery sets of symbol i (0-based buckets), {i} first.
std::vector<std::vector<std::size_t>> canonical_recovery_sets(const GoodVector& v, std::size_t i);

RecoveryPlan goodvec_certified_plan(const GoodVector& v, const CodeSpec& code, const BatchRequest& request);

CodeSpec compose_parallel(const CodeSpec& a, const CodeSpec& b);
CodeSpec compose_concat(const CodeSpec& a, const CodeSpec& b);
CodeSpec compose_repeat(const CodeSpec& c, std::size_t count);

}  // namespace bacforge
