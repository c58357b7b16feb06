#include "bacforge/random_affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>

namespace bacforge {

namespace {

constexpr std::uint64_t kLineStream = 0x6c696e6573ULL;   // "lines"
constexpr std::uint64_t kPointStream = 0x706f696e7473ULL;  // "points"

bool bernoulli(std::mt19937_64& rng, double p) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u < p;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

AffinePlane::AffinePlane(std::uint32_t q) : q_(q) {
  PrimeField check(q);  // throws for non-prime q
  (void)check;
}

std::vector<std::size_t> AffinePlane::line_points(std::uint32_t slope, std::uint32_t intercept) const {
  std::vector<std::size_t> pts;
  for (std::uint32_t a = 0; a < q_; ++a) {
    const auto b = static_cast<std::uint32_t>((std::uint64_t{slope} * a + intercept) % q_);
    pts.push_back(point(a, b));
  }
  return pts;
}

std::vector<std::size_t> AffinePlane::vertical_points(std::uint32_t c) const {
  std::vector<std::size_t> pts;
  for (std::uint32_t b = 0; b < q_; ++b) pts.push_back(point(c, b));
  return pts;
}

std::vector<std::vector<std::size_t>> AffinePlane::all_lines() const {
  std::vector<std::vector<std::size_t>> lines;
  lines.reserve(line_count());
  for (std::uint32_t slope = 0; slope < q_; ++slope) {
    for (std::uint32_t c = 0; c < q_; ++c) lines.push_back(line_points(slope, c));
  }
  for (std::uint32_t c = 0; c < q_; ++c) lines.push_back(vertical_points(c));
  return lines;
}

std::size_t AffinePlane::line_through(std::size_t pt, std::uint32_t slope) const {
  const std::uint64_t a = x_of(pt), b = y_of(pt);
  const auto intercept = (b + q_ - (std::uint64_t{slope} * a) % q_) % q_;
  return std::size_t{slope} * q_ + intercept;
}

AffineParams default_params(std::uint32_t q, std::size_t k, std::size_t s) {
  if (q < 2 || k == 0 || s == 0) throw std::invalid_argument("default_params needs q >= 2 and k, s >= 1");
  const double n = double(q) * double(q);
  const double ks = double(k) * double(s);
  const double raw1 = 32.0 * std::sqrt(ks * ks * ks / double(q)) * std::log(n);
  const double raw2 = 1.0 / (2.0 * std::sqrt(ks * double(q)));
  AffineParams out;
  out.p1 = std::min(raw1, 1.0);
  out.p2 = std::min(raw2, 1.0);
  out.clamped = raw1 > 1.0 || raw2 > 1.0;
  out.theory_regime = std::pow(ks, 1.5) < std::pow(n, 0.25) / (32.0 * std::log(n));
  return out;
}

std::size_t AffinePlaneCode::slope_class(std::uint32_t slope) const noexcept {
  const std::size_t v = slope == 0 ? plane.q() : slope;
  return (v + s - 1) / s;
}

std::size_t AffinePlaneCode::selected_count() const noexcept {
  return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
}

AffinePlaneCode random_bac(std::uint32_t q, std::size_t k, std::size_t s, double p1, double p2,
                           std::uint64_t seed, PrimeField field) {
  AffinePlane plane(q);
  if (s == 0 || s > q) throw std::invalid_argument("slope width s must lie in [1, q]");
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (!(p1 > 0.0 && p1 <= 1.0) || !(p2 > 0.0 && p2 <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in (0, 1]");
  }
  const std::size_t n = plane.point_count();
  const std::size_t half = (q + s - 1) / s;

  std::mt19937_64 line_rng(splitmix64(seed ^ kLineStream));
  std::mt19937_64 point_rng(splitmix64(seed ^ kPointStream));
  std::vector<bool> selected(n);
  for (std::size_t id = 0; id < n; ++id) selected[id] = bernoulli(line_rng, p1);
  std::vector<std::vector<std::size_t>> point_sets(n);
  for (std::size_t id = 0; id < n; ++id) {
    for (auto pt : plane.line_points(static_cast<std::uint32_t>(id / q), static_cast<std::uint32_t>(id % q))) {
      if (bernoulli(point_rng, p2)) point_sets[id].push_back(pt);
    }
  }

  AffinePlaneCode apc{plane, k, s, p1, p2, seed, kAffineRngId, std::move(selected), std::move(point_sets),
                      std::vector<std::vector<std::size_t>>(half), CodeSpec(field, 1, {Bucket{}})};
  std::vector<Bucket> buckets(2 * half);
  for (std::size_t pt = 0; pt < n; ++pt) buckets[apc.info_bucket_of(pt)].push_back(FVector::unit(n, pt));
  for (std::size_t id = 0; id < n; ++id) {
    if (!apc.selected[id] || apc.point_sets[id].empty()) continue;
    const std::size_t cls = apc.slope_class(static_cast<std::uint32_t>(id / q)) - 1;
    std::vector<Residue> col(n, 0);
    for (auto pt : apc.point_sets[id]) col[pt] = 1;
    buckets[half + cls].push_back(FVector(field, std::move(col)));
    apc.parity_lines[cls].push_back(id);
  }
  apc.code = CodeSpec(field, n, std::move(buckets));
  return apc;
}

std::optional<RecoveryPlan> greedy_plan(const AffinePlaneCode& apc, const BatchRequest& request, bool strict_appendix) {
  const auto& code = apc.code;
  const auto& plane = apc.plane;
  const std::uint32_t q = plane.q();
  const std::size_t half = apc.info_buckets();
  const std::size_t k = request.size();
  for (auto i : request.indices) {
    if (i >= code.n()) throw std::invalid_argument("request index out of range");
  }
  if (k == 0 || k > code.m()) return std::nullopt;

  const auto& field = code.field();
  const Residue minus_one = field.neg(1);
  const std::set<std::size_t> requested(request.indices.begin(), request.indices.end());
  auto column_of_point = [&](std::size_t pt) {
    // Info bucket columns are the bucket's points in increasing index order.
    const std::size_t b = apc.info_bucket_of(pt);
    const std::size_t first_point = std::size_t{b} * apc.s * q;
    return pt - first_point;
  };

  RecoveryPlan plan;
  for (std::size_t l = 0; l < code.m(); ++l) plan.responses.push_back(FVector::zero(code.bucket_size(l)));
  std::vector<bool> used(code.m(), false);

  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t x = request.indices[j];
    const std::size_t own = apc.info_bucket_of(x);
    if (!strict_appendix && !used[own]) {
      used[own] = true;
      plan.sets.push_back({own});
      plan.combos.push_back({1});
      plan.responses[own] = FVector::unit(code.bucket_size(own), column_of_point(x));
      continue;
    }
    bool found = false;
    for (std::uint32_t slope = 0; slope < q && !found; ++slope) {
      const std::size_t id = plane.line_through(x, slope);
      if (!apc.selected[id]) continue;
      const auto& pl = apc.point_sets[id];
      if (pl.empty() || !std::binary_search(pl.begin(), pl.end(), x)) continue;
      const auto pts = plane.line_points(slope, static_cast<std::uint32_t>(id % q));
      if (std::any_of(pts.begin(), pts.end(), [&](std::size_t p) { return p != x && requested.count(p); })) continue;
      std::set<std::size_t> r;
      for (auto p : pl) {
        if (p != x) r.insert(apc.info_bucket_of(p));
      }
      const std::size_t cls = apc.slope_class(slope) - 1;
      const std::size_t parity = half + cls;
      r.insert(parity);
      if (std::any_of(r.begin(), r.end(), [&](std::size_t l) { return used[l]; })) continue;

      found = true;
      std::vector<std::size_t> part(r.begin(), r.end());
      std::vector<Residue> combo;
      for (auto l : part) {
        used[l] = true;
        if (l == parity) {
          const auto& lines = apc.parity_lines[cls];
          const auto col = static_cast<std::size_t>(std::find(lines.begin(), lines.end(), id) - lines.begin());
          plan.responses[l] = FVector::unit(code.bucket_size(l), col);
          combo.push_back(1);
        } else {
          std::vector<Residue> resp(code.bucket_size(l), 0);
          for (auto p : pl) {
            if (p != x && apc.info_bucket_of(p) == l) resp[column_of_point(p)] = 1;
          }
          plan.responses[l] = FVector(field, std::move(resp));
          combo.push_back(minus_one);
        }
      }
      plan.sets.push_back(std::move(part));
      plan.combos.push_back(std::move(combo));
    }
    if (!found) return std::nullopt;
  }
  for (std::size_t l = 0; l < code.m(); ++l) {
    if (used[l]) continue;
    plan.sets.back().push_back(l);
    plan.combos.back().push_back(0);
  }
  if (!certify_plan(code, request, plan, ResponseModel::Linear)) {
    throw std::logic_error("greedy plan failed certification");
  }
  return plan;
}

BatchRequest sample_multiset(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n == 0 || k == 0) throw std::invalid_argument("sample_multiset needs n, k >= 1");
  std::mt19937_64 rng(seed);
  // Floyd's algorithm: k distinct positions out of n+k-1, then subtract ranks.
  const std::size_t total = n + k - 1;
  std::set<std::size_t> chosen;
  for (std::size_t r = total - k; r < total; ++r) {
    const std::size_t v = bounded(rng, r + 1);
    if (!chosen.insert(v).second) chosen.insert(r);
  }
  std::vector<std::size_t> out;
  std::size_t rank = 0;
  for (auto c : chosen) out.push_back(c - rank++);
  return BatchRequest{std::move(out)};
}

TrialReport trial_verify(const AffinePlaneCode& apc, std::size_t k, std::size_t trials, std::uint64_t seed,
                         bool strict_appendix, unsigned jobs) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  TrialReport report;
  report.trials = trials;
  std::mutex merge;
  auto worker = [&](unsigned shard) {
    std::size_t ok = 0;
    std::vector<BatchRequest> failed;
    for (std::size_t t = shard; t < trials; t += jobs) {
      const auto request = sample_multiset(apc.code.n(), k, splitmix64(seed + t));
      if (greedy_plan(apc, request, strict_appendix)) {
        ++ok;
      } else {
        failed.push_back(request);
      }
    }
    std::lock_guard lock(merge);
    report.successes += ok;
    report.failures.insert(report.failures.end(), failed.begin(), failed.end());
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < jobs; ++s) pool.emplace_back(worker, s);
  }
  std::sort(report.failures.begin(), report.failures.end());
  return report;
}

double redundancy_bound(std::uint32_t q, std::size_t k, std::size_t s) {
  const double n = double(q) * double(q);
  const double ks = double(k) * double(s);
  return n + 64.0 * std::pow(ks, 1.5) * std::pow(n, 0.75) * std::log(n);
}

}  // namespace bacforge
