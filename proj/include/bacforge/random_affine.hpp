#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bacforge/code_model.hpp"
#include "bacforge/verifier.hpp"

namespace bacforge {

/// Affine plane of prime order q. Point (a, b) has index a*q + b (a is the x-coordinate).
/// Non-vertical line y = slope*x + intercept has id slope*q + intercept; vertical line c is x = c.
class AffinePlane {
 public:
  explicit AffinePlane(std::uint32_t q);

  std::uint32_t q() const noexcept { return q_; }
  std::size_t point_count() const noexcept { return std::size_t{q_} * q_; }
  std::size_t line_count() const noexcept { return point_count() + q_; }

  std::size_t point(std::uint32_t a, std::uint32_t b) const noexcept { return std::size_t{a} * q_ + b; }
  std::uint32_t x_of(std::size_t point) const noexcept { return static_cast<std::uint32_t>(point / q_); }
  std::uint32_t y_of(std::size_t point) const noexcept { return static_cast<std::uint32_t>(point % q_); }

  std::vector<std::size_t> line_points(std::uint32_t slope, std::uint32_t intercept) const;
  std::vector<std::size_t> vertical_points(std::uint32_t c) const;
  /// Every line as a point set: the q^2 non-vertical lines by id, then the q vertical lines.
  std::vector<std::vector<std::size_t>> all_lines() const;
  /// Id of the non-vertical line with the given slope through a point.
  std::size_t line_through(std::size_t point, std::uint32_t slope) const;

 private:
  std::uint32_t q_;
};

inline constexpr const char* kAffineRngId = "mt19937_64/splitmix64-v1";

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct AffineParams {
  double p1 = 1.0;
  double p2 = 1.0;
  bool clamped = false;       // a raw probability exceeded 1
  bool theory_regime = false;  // (ks)^{3/2} < n^{1/4} / (32 ln n)
};

AffineParams default_params(std::uint32_t q, std::size_t k, std::size_t s);

struct AffinePlaneCode {
  AffinePlane plane;
  std::size_t k = 0;
  std::size_t s = 0;
  double p1 = 0, p2 = 0;
  std::uint64_t seed = 0;
  std::string rng = kAffineRngId;
  std::vector<bool> selected;                        // by non-vertical line id
  std::vector<std::vector<std::size_t>> point_sets;  // P(L) by non-vertical line id
  std::vector<std::vector<std::size_t>> parity_lines;  // per class: line id of each parity column
  CodeSpec code;

  std::size_t m() const noexcept { return code.m(); }
  std::size_t info_buckets() const noexcept { return code.m() / 2; }
  std::size_t info_bucket_of(std::size_t point) const noexcept { return plane.x_of(point) / s; }
  /// 1-based slope class; slope 0 is treated as slope q.
  std::size_t slope_class(std::uint32_t slope) const noexcept;
  std::size_t selected_count() const noexcept;
};

AffinePlaneCode random_bac(std::uint32_t q, std::size_t k, std::size_t s, double p1, double p2,
                           std::uint64_t seed, PrimeField field = PrimeField(2));

/// Greedy recovery along selected lines; each returned plan has been certified.
/// Unless strict_appendix, a request may also take its own unused info bucket alone.
std::optional<RecoveryPlan> greedy_plan(const AffinePlaneCode& apc, const BatchRequest& request,
                                        bool strict_appendix = false);

struct TrialReport {
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::vector<BatchRequest> failures;  // sorted
  double rate() const noexcept { return trials == 0 ? 0.0 : double(successes) / double(trials); }
};

/// Uniform multiset of size k over [0, n), drawn via stars and bars.
BatchRequest sample_multiset(std::size_t n, std::size_t k, std::uint64_t seed);

TrialReport trial_verify(const AffinePlaneCode& apc, std::size_t k, std::size_t trials, std::uint64_t seed,
                         bool strict_appendix = false, unsigned jobs = 1);

/// n + 64 (ks)^{3/2} n^{3/4} ln n with n = q^2.
double redundancy_bound(std::uint32_t q, std::size_t k, std::size_t s);

}  // namespace bacforge
