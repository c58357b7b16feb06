#include <doctest.h>

#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "bacforge/constructions.hpp"
#include "bacforge/verifier.hpp"
#include "../support/reference_codes.hpp"

using namespace bacforge;

namespace {

using Vec = std::vector<Residue>;

// Span of columns in F_p^n by closure: fine for n <= 3.
bool in_span(const std::vector<Vec>& cols, const Vec& target, std::uint32_t p) {
  std::set<Vec> span{Vec(target.size(), 0)};
  for (const auto& c : cols) {
    std::set<Vec> next = span;
    for (const auto& v : span) {
      Vec w = v;
      for (std::uint32_t a = 1; a < p; ++a) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = (w[i] + c[i]) % p;
        next.insert(w);
      }
    }
    span.swap(next);
  }
  return span.count(target) > 0;
}

Vec column(const FVector& v) { return Vec(v.begin(), v.end()); }

// Can the buckets in `part` produce e_i? Projection: each bucket contributes one stored column (or nothing).
bool part_recovers(const CodeSpec& code, const std::vector<std::size_t>& part, std::size_t i, ResponseModel model) {
  Vec target(code.n(), 0);
  target[i] = 1;
  const std::uint32_t p = code.field().modulus();
  if (model == ResponseModel::Linear) {
    std::vector<Vec> cols;
    for (auto l : part)
      for (const auto& c : code.bucket(l)) cols.push_back(column(c));
    return in_span(cols, target, p);
  }
  std::vector<std::size_t> pick(part.size(), 0);
  while (true) {
    std::vector<Vec> cols;
    for (std::size_t a = 0; a < part.size(); ++a)
      if (pick[a] > 0) cols.push_back(column(code.bucket(part[a])[pick[a] - 1]));
    if (in_span(cols, target, p)) return true;
    std::size_t a = 0;
    while (a < part.size() && ++pick[a] > code.bucket_size(part[a])) pick[a++] = 0;
    if (a == part.size()) return false;
  }
}

// Every assignment of buckets to requests (k^m of them).
bool brute_plan_exists(const CodeSpec& code, const BatchRequest& r, ResponseModel model) {
  const std::size_t m = code.m(), k = r.size();
  std::vector<std::size_t> owner(m, 0);
  while (true) {
    std::vector<std::vector<std::size_t>> parts(k);
    for (std::size_t l = 0; l < m; ++l) parts[owner[l]].push_back(l);
    bool ok = true;
    for (std::size_t j = 0; j < k && ok; ++j) ok = !parts[j].empty() && part_recovers(code, parts[j], r.indices[j], model);
    if (ok) return true;
    std::size_t l = 0;
    while (l < m && ++owner[l] == k) owner[l++] = 0;
    if (l == m) return false;
  }
}

CodeSpec random_code(std::mt19937_64& rng, const PrimeField& f, std::size_t n, std::size_t m) {
  std::vector<Bucket> buckets(m);
  for (auto& b : buckets) {
    const std::size_t cols = 1 + rng() % 2;
    for (std::size_t c = 0; c < cols; ++c) {
      Vec e(n, 0);
      for (auto& x : e)
        if (rng() % 2) x = static_cast<Residue>(rng() % f.modulus());
      b.emplace_back(f, e);
    }
  }
  return CodeSpec(f, n, std::move(buckets));
}

RecoveryPlan c2_all_ones_plan() {
  RecoveryPlan plan;
  plan.sets = {{0}, {1}, {2}, {3, 4}};
  plan.responses = {FVector::unit(3, 0), FVector::unit(3, 0), FVector::unit(3, 0),
                    FVector(PrimeField(2), {1, 1, 1}), FVector::unit(1, 0)};
  plan.combos = {{1}, {1}, {1}, {1, 1}};
  return plan;
}

}  // namespace

TEST_CASE("batch requests are sorted and range-checked") {
  CHECK(BatchRequest::make({3, 0, 3}, 4).indices == std::vector<std::size_t>{0, 3, 3});
  CHECK_THROWS_AS(BatchRequest::make({4}, 4), std::invalid_argument);
  CHECK_THROWS_AS(BatchRequest::make({}, 4), std::invalid_argument);
}

TEST_CASE("multiset enumeration counts") {
  for (auto [n, k, want] : {std::tuple{4u, 4u, 35u}, std::tuple{5u, 3u, 35u}, std::tuple{17u, 3u, 969u}}) {
    std::vector<std::size_t> idx(k, 0);
    std::size_t count = 0;
    std::vector<std::size_t> prev;
    do {
      CHECK(std::is_sorted(idx.begin(), idx.end()));
      if (!prev.empty()) CHECK(prev < idx);
      prev = idx;
      ++count;
    } while (next_multiset(idx, n));
    CHECK(count == want);
  }
}

TEST_CASE("certify_plan on the all-ones request") {
  const auto c2 = ref::c2();
  const auto r = BatchRequest::make({0, 0, 0, 0}, 4);
  auto plan = c2_all_ones_plan();
  CHECK(certify_plan(c2, r, plan, ResponseModel::Linear));
  CHECK_FALSE(certify_plan(c2, r, plan, ResponseModel::ProjectionOnly));  // bucket 4 sends a sum

  auto uncovered = plan;
  uncovered.sets[3] = {3};
  uncovered.combos[3] = {1};
  CHECK_FALSE(certify_plan(c2, r, uncovered, ResponseModel::Linear));

  auto wrong_length = plan;
  wrong_length.responses[4] = FVector::unit(2, 0);
  CHECK_THROWS_AS(certify_plan(c2, r, wrong_length, ResponseModel::Linear), std::invalid_argument);

  // C1: x4 from bucket 4 and x1+x4 from bucket 5, each a single stored symbol.
  const auto c1 = ref::c1();
  RecoveryPlan proj;
  proj.sets = plan.sets;
  proj.responses = {FVector::unit(3, 0), FVector::unit(3, 0), FVector::unit(3, 0), FVector::unit(3, 2),
                    FVector::unit(2, 0)};
  proj.combos = {{1}, {1}, {1}, {1, 1}};
  CHECK(certify_plan(c1, r, proj, ResponseModel::ProjectionOnly));
}

TEST_CASE("find_plan examples") {
  const auto plan = find_plan(ref::five_ten(), BatchRequest::make({0, 0, 0}, 5), ResponseModel::Linear);
  REQUIRE(plan);
  CHECK(plan->sets == std::vector<std::vector<std::size_t>>{{0}, {1, 3}, {2, 4}});

  const auto c2 = ref::c2();
  const auto r = BatchRequest::make({0, 1, 2, 3}, 4);
  const auto p2 = find_plan(c2, r, ResponseModel::Linear);
  REQUIRE(p2);
  CHECK(certify_plan(c2, r, *p2, ResponseModel::Linear));

  const PrimeField f(2);
  const CodeSpec zero(f, 1, {{FVector(f, {0})}});
  CHECK_FALSE(find_plan(zero, BatchRequest::make({0}, 1), ResponseModel::Linear));
  CHECK_THROWS_AS(find_plan(zero, BatchRequest::make({0, 0}, 1), ResponseModel::Linear), std::invalid_argument);
}

TEST_CASE("find_plan agrees with brute-force partition search") {
  std::mt19937_64 rng(10);
  std::size_t positives = 0, total = 0;
  for (std::uint32_t p : {2u, 3u}) {
    const PrimeField f(p);
    for (int trial = 0; trial < 120; ++trial) {
      const std::size_t n = 1 + rng() % 3, m = 2 + rng() % 3;
      const auto code = random_code(rng, f, n, m);
      const std::size_t k = 1 + rng() % m;
      PlanSearch linear(code, ResponseModel::Linear), projection(code, ResponseModel::ProjectionOnly);
      std::vector<std::size_t> idx(k, 0);
      do {
        const BatchRequest r{idx};
        for (auto model : {ResponseModel::Linear, ResponseModel::ProjectionOnly}) {
          auto& search = model == ResponseModel::Linear ? linear : projection;
          const auto plan = search.find(r);
          CHECK(plan.has_value() == brute_plan_exists(code, r, model));
          if (plan) CHECK(certify_plan(code, r, *plan, model));
          positives += plan.has_value();
          ++total;
        }
        // Projection success implies linear success.
        if (projection.find(r)) CHECK(linear.find(r));
      } while (next_multiset(idx, n));
    }
  }
  CHECK(positives > 0);
  CHECK(positives < total);
}

TEST_CASE("verify_bac and verify_pir") {
  const auto c2 = ref::c2();
  const auto report = verify_bac(c2, 4, ResponseModel::Linear, 1);
  CHECK(report.total_requests == 35);
  CHECK(report.passed());
  CHECK(verify_bac(ref::c1(), 4, ResponseModel::ProjectionOnly).passed());
  CHECK_FALSE(verify_bac(c2, 4, ResponseModel::ProjectionOnly).passed());

  auto buckets = c2.buckets();
  buckets.pop_back();
  const CodeSpec without5(c2.field(), 4, buckets);
  const auto bad = verify_bac(without5, 4, ResponseModel::Linear);
  REQUIRE_FALSE(bad.passed());
  CHECK(bad.failures.front().request.indices == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(std::is_sorted(bad.failures.begin(), bad.failures.end(),
                       [](const auto& a, const auto& b) { return a.request < b.request; }));

  // Sharding must not change the outcome.
  const auto sharded = verify_bac(without5, 4, ResponseModel::Linear, 3);
  CHECK(sharded.failures.size() == bad.failures.size());

  CHECK(verify_pir(c2, 4, ResponseModel::Linear).total_requests == 4);
  CHECK(verify_pir(c2, 4, ResponseModel::Linear).passed());
  CHECK(verify_pir(parity_code_k2(5), 2, ResponseModel::Linear).passed());
  CHECK_THROWS_AS(verify_bac(c2, 6, ResponseModel::Linear), std::invalid_argument);

  const PrimeField f(2);
  const CodeSpec with_empty(f, 1, {{FVector(f, {1})}, {}});
  CHECK_THROWS_AS(verify_bac(with_empty, 1, ResponseModel::Linear), std::invalid_argument);
}

TEST_CASE("check_subset_spanning") {
  CHECK(check_subset_spanning(ref::c2(), 4));
  CHECK(check_subset_spanning(trivial_replication(3, 1), 1));
  const PrimeField f(2);
  const CodeSpec split(f, 2, {{FVector::unit(2, 0)}, {FVector::unit(2, 1)}});
  CHECK_FALSE(check_subset_spanning(split, 2));
}
