// End-to-end acceptance run: one PASS/FAIL line per criterion, each timed against its budget.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bacforge/bounds.hpp"
#include "bacforge/cli.hpp"
#include "bacforge/code_io.hpp"
#include "bacforge/code_model.hpp"
#include "bacforge/constructions.hpp"
#include "bacforge/random_affine.hpp"
#include "bacforge/simulator.hpp"
#include "bacforge/verifier.hpp"
#include "../support/reference_codes.hpp"

using namespace bacforge;
namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::vector<BatchRequest> all_multisets(std::size_t n, std::size_t k) {
  std::vector<BatchRequest> out;
  std::vector<std::size_t> idx(k, 0);
  do out.push_back(BatchRequest{idx});
  while (next_multiset(idx, n));
  return out;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return rc;
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / ("bacforge-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

// Every code that passed exhaustive verification, for the cross-cutting checks in 8 and 9.
struct Verified {
  std::string name;
  CodeSpec code;
  std::size_t k;
  bool batch;  // false: only the PIR property was checked
};
std::vector<Verified> g_verified;
std::string g_note;  // optional detail appended to a criterion's line

void record(std::string name, const CodeSpec& code, std::size_t k, bool batch = true) {
  g_verified.push_back({std::move(name), code, k, batch});
}

void pass_bac(const std::string& name, const CodeSpec& code, std::size_t k, std::size_t expected_requests,
              ResponseModel model = ResponseModel::Linear) {
  const auto report = verify_bac(code, k, model);
  expect(report.total_requests == expected_requests,
         name + ": checked " + std::to_string(report.total_requests) + " requests");
  expect(report.passed(), name + ": " + std::to_string(report.failures.size()) + " failing requests");
  record(name, code, k);
}

CodeSpec delete_symbol(const CodeSpec& code, std::size_t bucket, std::size_t column) {
  auto buckets = code.buckets();
  buckets[bucket].erase(buckets[bucket].begin() + static_cast<std::ptrdiff_t>(column));
  return CodeSpec(code.field(), code.n(), std::move(buckets));
}

// ---------------------------------------------------------------------------------------------

void criterion1(const fs::path& dir) {
  const auto file = (dir / "c2.json").string();
  expect(run_cli({"construct", "cyclic", "--n", "4", "--k", "4", "--m", "5", "--out", file}) == 0,
         "construct cyclic failed");
  const auto doc = load_code(file);
  expect(doc.code == ref::c2(), "constructed code differs from C2");
  expect(total_length(doc.code) == 13, "N != 13");

  const auto t0 = std::chrono::steady_clock::now();
  expect(run_cli({"verify", file, "--k", "4", "--mode", "linear"}) == 0, "verify --k 4 failed");
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  expect(dt.count() < 1.0, "verify took " + std::to_string(dt.count()) + " s");
  pass_bac("C2", doc.code, 4, 35);

  const auto c1 = ref::c1();
  expect(total_length(c1) == 14, "C1 N != 14");
  pass_bac("C1 (projection)", c1, 4, 35, ResponseModel::ProjectionOnly);
  for (std::size_t l = 0; l < c1.m(); ++l) {
    for (std::size_t c = 0; c < c1.bucket_size(l); ++c) {
      const auto smaller = delete_symbol(c1, l, c);
      expect(!verify_bac(smaller, 4, ResponseModel::ProjectionOnly).passed(),
             "C1 minus bucket " + std::to_string(l + 1) + " symbol " + std::to_string(c + 1) + " still passes");
    }
  }
}

void criterion2(const fs::path& dir) {
  const auto code = good_vector_code(GoodVector::make({1, 1}));
  expect(code == ref::five_ten(), "good_vector_code((1,1)) differs from the (5,10,3,5) table");
  expect(total_length(code) == 10 && code.m() == 5 && code.n() == 5, "shape is not (5,10,3,5)");
  pass_bac("(5,10,3,5)", code, 3, 35);

  std::string json;
  expect(run_cli({"bounds", "--n", "5", "--k", "3", "--m", "5"}, &json) == 0, "bounds exited non-zero");
  const auto j = Json::parse(json);
  expect(j.at("lb_num") == "155" && j.at("lb_den") == "17", "lb is not 155/17: " + json);
  expect(j.at("lb_ceil") == 10 && j.at("ub") == 10 && j.at("optimal") == true, "not optimal at 10: " + json);
  (void)dir;
}

void criterion3() {
  struct Case {
    std::size_t n, k;
  };
  for (const auto [n, k] : {Case{4, 4}, Case{6, 3}, Case{6, 2}, Case{20, 4}}) {
    const std::size_t m = k + 1;
    // ceil((k - 1 + 1/k) n) = ceil(((k-1)k + 1) n / k)
    const std::size_t target = (((k - 1) * k + 1) * n + k - 1) / k;
    const auto code = cyclic_shift_code(CyclicParams::make(n, k, m));
    const std::string name = "cyclic(" + std::to_string(n) + "," + std::to_string(k) + ")";
    expect(total_length(code) == target,
           name + ": N = " + std::to_string(total_length(code)) + ", want " + std::to_string(target));
    std::size_t count = 1;  // C(n+k-1, k)
    for (std::size_t i = 1; i <= k; ++i) count = count * (n + i - 1) / i;
    pass_bac(name, code, k, count);
    if (n % (k * (k + 1)) == 0) {
      const auto u = uniform_code(n, k);
      expect(total_length(u) == target, "uniform" + name.substr(6) + ": wrong N");
      pass_bac("uniform" + name.substr(6), u, k, count);
    }
  }
}

void criterion4() {
  const auto code = uniform_code(20, 4);
  expect(code == ref::uniform_20_4(), "uniform_code(20,4) differs from the 5x5 table");
  for (std::size_t l = 0; l < 5; ++l) expect(code.bucket_size(l) == 13, "bucket size != 13");
  expect(total_length(code) == 65, "N != 65");
  pass_bac("uniform(20,4)", code, 4, 8855);

  std::vector<SimReport> reports;
  const auto planner = exhaustive_planner(code, ResponseModel::Linear);
  std::mt19937_64 rng(7);
  std::vector<Residue> x(20);
  for (auto& e : x) e = static_cast<Residue>(rng() & 1u);
  const FVector data(code.field(), x);
  for (const auto& r : all_multisets(20, 4)) reports.push_back(serve_batch(code, data, r, planner, ResponseModel::Linear));
  const auto stats = load_stats(reports);
  expect(stats.max_symbols_read <= 3, "a node read " + std::to_string(stats.max_symbols_read) + " symbols");
  for (const auto& r : reports) expect(r.max_load == 1, "a node answered more than once");
}

void criterion5() {
  using V = std::vector<std::vector<std::size_t>>;
  expect(enumerate_good_vectors(1, 2) == V{{1, 1}}, "t=1, len 2 is not [(1,1)]");
  expect(enumerate_good_vectors(2, 4).empty(), "t=2, len 4 is not empty");
  expect(enumerate_good_vectors(3, 6).empty(), "t=3, len 6 is not empty");
  for (std::size_t t = 1; t <= 200; ++t) {
    const auto v = good_vector_2t1(t);
    expect(v.entries.size() == 2 * t + 1 && is_good_vector(v.entries, t),
           "good_vector_2t1(" + std::to_string(t) + ") invalid");
  }
  const auto v = GoodVector::make({2, 3, 2, 4, 3, 1, 1, 4});
  expect(v.t == 4, "t != 4");
  const std::vector<std::size_t> j_map{0, 7, 3, 5, 8};
  expect(v.last_occurrence == j_map, "j map is not {1:7, 2:3, 3:5, 4:8}");
}

void criterion6() {
  const auto v = GoodVector::make({2, 3, 2, 4, 3, 1, 1, 4});
  const auto code = good_vector_code(v);
  expect(code.n() == 17 && code.m() == 17 && total_length(code) == 85, "shape is not (17,85,*,17)");
  const auto pir = verify_pir(code, 7, ResponseModel::Linear);
  expect(pir.total_requests == 17 && pir.passed(), "verify_pir(k=7) failed");
  record("goodvec t=4 (PIR)", code, 7, false);

  std::size_t count = 0;
  std::vector<std::size_t> idx(7, 0);
  do {
    const auto request = BatchRequest{idx};
    const auto plan = goodvec_certified_plan(v, code, request);
    expect(certify_plan(code, request, plan, ResponseModel::Linear), "certify_plan rejected a certified plan");
    ++count;
  } while (next_multiset(idx, 17));
  expect(count == 245157, "enumerated " + std::to_string(count) + " multisets");

  PlanSearch search(code, ResponseModel::Linear);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto request = sample_multiset(17, 7, splitmix64(0xacce55 + s));
    const auto plan = search.find(request);
    expect(plan && certify_plan(code, request, *plan, ResponseModel::Linear), "find_plan failed on a sample");
  }
}

void criterion7() {
  const auto c2 = ref::c2();
  const auto par = compose_parallel(c2, c2);
  expect(par.n() == 4 && total_length(par) == 26 && par.m() == 10, "parallel shape is not (4,26,8,10)");
  pass_bac("parallel(C2,C2)", par, 8, 165);
  const auto rep = compose_repeat(ref::five_ten(), 2);
  expect(rep.n() == 10 && total_length(rep) == 20 && rep.m() == 5, "repeat shape is not (10,20,3,5)");
  pass_bac("repeat(5-10,2)", rep, 3, 220);
}

void criterion8() {
  for (std::uint64_t k = 3; k <= 100; ++k) {
    const Rational lhs(static_cast<long long>(4 * k + 16), static_cast<long long>(3 * k * k + k + 4));
    const Rational rhs(6, static_cast<long long>((k + 1) * k * (k - 1)));  // 1 / C(k+1, 3)
    expect(lhs >= rhs, "inequality fails at k=" + std::to_string(k));
    expect(lb_kplus2(7, k) >= lb_midrange(7, k, k + 2), "kplus2 < midrange at k=" + std::to_string(k));
  }
  for (const auto& v : g_verified) {
    if (v.k > v.code.m()) continue;
    const auto lb = best_lower_bound(v.code.n(), v.k, v.code.m());
    expect(BigInt(total_length(v.code)) >= ceil(lb.value), v.name + ": N below the lower bound");
  }
  for (const auto& row : bound_table({1, 20}, {1, 8}, MRule::All)) {
    if (row.m > 16 || !row.upper) continue;
    expect(BigInt(row.upper->length) >= row.lower_ceil,
           "ub < lb at (" + std::to_string(row.n) + "," + std::to_string(row.k) + "," + std::to_string(row.m) + ")");
  }
}

void criterion9() {
  for (const auto& v : g_verified) {
    expect(check_subset_spanning(v.code, v.k), v.name + ": subset spanning fails");
  }
  auto buckets = ref::c2().buckets();
  const PrimeField f2(2);
  buckets[0].push_back(FVector(f2, {1, 1, 0, 0}));     // x1 + x2
  buckets[3].push_back(FVector(f2, {0, 1, 1, 1}));     // x2 + x3 + x4
  buckets[4].push_back(FVector(f2, {1, 1, 1, 1}));     // duplicate
  const CodeSpec padded(f2, 4, std::move(buckets));
  expect(total_length(padded) == 16, "padding went wrong");
  const auto reduced = cap_and_reduce(padded);
  expect(total_length(reduced) == 13, "cap_and_reduce left N = " + std::to_string(total_length(reduced)));
  expect(reduced == ref::c2(), "cap_and_reduce did not restore C2");
  for (const auto& r : all_multisets(4, 4)) expect(find_plan(reduced, r, ResponseModel::Linear).has_value(), "plan lost");
}

void criterion10() {
  for (std::uint32_t q : {2u, 3u, 5u, 7u, 11u, 13u}) {
    const AffinePlane plane(q);
    const auto lines = plane.all_lines();
    expect(lines.size() == std::size_t{q} * q + q, "line count");
    std::vector<std::size_t> through(plane.point_count(), 0);
    for (const auto& l : lines) {
      expect(l.size() == q, "line size");
      for (auto p : l) ++through[p];
    }
    for (auto c : through) expect(c == q + 1, "point not on q+1 lines");
    // Two distinct points share exactly one line.
    std::vector<std::size_t> pair_count(plane.point_count() * plane.point_count(), 0);
    for (const auto& l : lines) {
      for (auto a : l)
        for (auto b : l)
          if (a < b) ++pair_count[a * plane.point_count() + b];
    }
    for (std::size_t a = 0; a < plane.point_count(); ++a)
      for (std::size_t b = a + 1; b < plane.point_count(); ++b)
        expect(pair_count[a * plane.point_count() + b] == 1, "pair not on exactly one line");
  }

  const auto params = default_params(13, 2, 2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = random_bac(13, 2, 2, params.p1, params.p2, seed);
    const auto b = random_bac(13, 2, 2, params.p1, params.p2, seed);
    expect(a.code == b.code && a.selected == b.selected, "seed " + std::to_string(seed) + " not deterministic");
    // Systematic: every point appears as an identity column of its info bucket.
    for (std::size_t pt = 0; pt < a.plane.point_count(); ++pt) {
      const auto unit = FVector::unit(a.code.n(), pt);
      const auto& bucket = a.code.bucket(a.info_bucket_of(pt));
      expect(std::find(bucket.begin(), bucket.end(), unit) != bucket.end(), "point missing from its info bucket");
    }
  }

  const auto full = random_bac(13, 2, 2, 1.0, 1.0, 2024);
  // Soundness only: whatever greedy returns must certify. Its success rate is not asserted.
  std::size_t returned = 0;
  for (std::uint64_t t = 0; t < 10000; ++t) {
    const auto request = sample_multiset(full.code.n(), 2, splitmix64(0x9ead + t));
    const auto plan = greedy_plan(full, request);
    if (!plan) continue;
    ++returned;
    expect(certify_plan(full.code, request, *plan, ResponseModel::Linear), "greedy returned an invalid plan");
  }
  expect(returned > 0, "greedy never returned a plan");
  g_note = "greedy served " + std::to_string(returned) + "/10000";

  double sum = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) sum += double(random_bac(13, 2, 2, 0.3, 1.0, seed).selected_count());
  const double mean = sum / 200, target = 0.3 * 169;
  expect(std::abs(mean - target) <= 0.1 * target, "mean |F| = " + std::to_string(mean));
}

void criterion11() {
  const auto c2 = ref::c2();
  const auto requests = all_multisets(4, 4);
  const auto planner = exhaustive_planner(c2, ResponseModel::Linear);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Residue> x(4);
    for (auto& e : x) e = static_cast<Residue>(rng() & 1u);
    Cluster cluster(c2, FVector(c2.field(), x));
    for (const auto& r : requests) {
      const auto rep = cluster.serve(r, planner, ResponseModel::Linear);
      for (std::size_t j = 0; j < r.size(); ++j) expect(rep.recovered[j] == x[r.indices[j]], "wrong value");
      expect(std::all_of(rep.loads.begin(), rep.loads.end(), [](std::size_t l) { return l == 1; }),
             "a node did not answer exactly once");
    }
    for (const auto& node : cluster.nodes()) expect(node.response_count == requests.size(), "response count");
  }
  const auto cmp = compare_models(c2, ref::c1(), requests);
  expect(cmp.linear_length == 13 && cmp.projection_length == 14, "compare_models lengths");
  expect(cmp.projection.max_symbols_read <= 1, "projection read more than one symbol");
  expect(cmp.rows.size() == 35, "compare_models row count");
}

}  // namespace

int main() {
  const auto dir = scratch_dir();
  struct Criterion {
    int id;
    double budget_s;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, 5, [&] { criterion1(dir); }}, {2, 1, [&] { criterion2(dir); }}, {3, 30, criterion3},
      {4, 120, criterion4},             {5, 10, criterion5},              {6, 600, criterion6},
      {7, 60, criterion7},              {8, 10, criterion8},              {9, 10, criterion9},
      {10, 300, criterion10},           {11, 30, criterion11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string why;
    try {
      c.body();
    } catch (const Failure& f) {
      why = f.what;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    if (why.empty() && dt.count() > c.budget_s) why = "over budget (" + std::to_string(c.budget_s) + " s)";
    const std::string detail = why.empty() ? g_note : why;
    std::printf("criterion %2d: %s  [%.2f s]%s%s\n", c.id, why.empty() ? "PASS" : "FAIL", dt.count(),
                detail.empty() ? "" : "  ", detail.c_str());
    g_note.clear();
    std::fflush(stdout);
    if (!why.empty()) ++failed;
  }
  fs::remove_all(dir);
  return failed == 0 ? 0 : 1;
}
