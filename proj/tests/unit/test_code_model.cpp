#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "bacforge/code_model.hpp"
#include "../support/reference_codes.hpp"

using namespace bacforge;

namespace {

FVector vec(std::initializer_list<std::int64_t> v) { return FVector(PrimeField(2), v); }

CodeSpec random_code(std::mt19937_64& rng, const PrimeField& f, std::size_t n, std::size_t m, std::size_t max_cols) {
  std::vector<Bucket> buckets(m);
  for (auto& b : buckets) {
    const std::size_t cols = rng() % (max_cols + 1);
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<Residue> e(n);
      for (auto& x : e) x = static_cast<Residue>(rng() % f.modulus());
      b.emplace_back(f, e);
    }
  }
  return CodeSpec(f, n, std::move(buckets));
}

}  // namespace

TEST_CASE("code shape checks") {
  const PrimeField f(2);
  CHECK_THROWS_AS(CodeSpec(f, 0, {{}}), std::invalid_argument);
  CHECK_THROWS_AS(CodeSpec(f, 2, {}), std::invalid_argument);
  CHECK_THROWS_AS(CodeSpec(f, 2, {{vec({1, 0, 0})}}), std::invalid_argument);
  CHECK(total_length(CodeSpec(f, 3, {{}, {}})) == 0);
  CHECK(total_length(ref::c2()) == 13);
  CHECK(total_length(ref::c1()) == 14);
}

TEST_CASE("encode") {
  const auto c2 = ref::c2();
  const PrimeField f(2);
  const auto w = encode(c2, FVector(f, {1, 0, 0, 0}));
  CHECK(w.values == std::vector<FVector>{vec({1, 0, 0}), vec({1, 0, 0}), vec({1, 0, 0}), vec({0, 0, 0}), vec({1})});
  const auto w2 = encode(c2, FVector(f, {1, 1, 0, 0}));
  CHECK(w2.values == std::vector<FVector>{vec({1, 1, 0}), vec({1, 1, 0}), vec({1, 0, 0}), vec({1, 0, 0}), vec({0})});
  for (const auto& b : encode(c2, FVector::zero(4)).values) CHECK(b.is_zero());
  CHECK_THROWS_AS(encode(c2, FVector::zero(3)), std::invalid_argument);
}

TEST_CASE("encode is linear") {
  std::mt19937_64 rng(5);
  const PrimeField f(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto code = random_code(rng, f, 4, 3, 3);
    std::vector<Residue> a(4), b(4);
    for (auto& x : a) x = rng() % 7;
    for (auto& x : b) x = rng() % 7;
    const FVector x(f, a), y(f, b);
    const auto wx = encode(code, x), wy = encode(code, y), wxy = encode(code, add(x, y, f));
    for (std::size_t l = 0; l < code.m(); ++l) CHECK(wxy.values[l] == add(wx.values[l], wy.values[l], f));
  }
}

TEST_CASE("bucket_set_recovers") {
  const auto c2 = ref::c2();
  const std::vector<std::size_t> r45{3, 4}, r4{3};
  CHECK(bucket_set_recovers(c2, r45, 0));
  CHECK_FALSE(bucket_set_recovers(c2, r4, 0));
  const std::vector<std::size_t> r24{1, 3};
  CHECK(bucket_set_recovers(ref::five_ten(), r24, 0));
  CHECK_THROWS(bucket_set_recovers(c2, r4, 4));
  const std::vector<std::size_t> bad{5};
  CHECK_THROWS(bucket_set_recovers(c2, bad, 0));
}

TEST_CASE("cap_and_reduce") {
  const PrimeField f(2);
  const CodeSpec one(f, 3, {{vec({1, 1, 0}), vec({0, 1, 1}), vec({1, 0, 1})}});
  const auto reduced = cap_and_reduce(one);
  CHECK(reduced.bucket(0) == Bucket{vec({1, 1, 0}), vec({0, 1, 1})});
  CHECK(cap_and_reduce(ref::c2()) == ref::c2());

  const CodeSpec wide(f, 4, {{vec({1, 1, 0, 0}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0}), vec({0, 0, 1, 1}),
                              vec({1, 0, 0, 0})}});
  CHECK(cap_and_reduce(wide).bucket_size(0) == 4);
}

TEST_CASE("cap_and_reduce keeps recoverability and is idempotent") {
  std::mt19937_64 rng(6);
  for (std::uint32_t p : {2u, 3u}) {
    const PrimeField f(p);
    for (int trial = 0; trial < 40; ++trial) {
      const auto code = random_code(rng, f, 3, 4, 5);
      const auto reduced = cap_and_reduce(code);
      CHECK(cap_and_reduce(reduced) == reduced);
      for (std::size_t l = 0; l < code.m(); ++l) CHECK(reduced.bucket_size(l) <= std::min<std::size_t>(code.bucket_size(l), 3));
      for (std::uint64_t mask = 0; mask < 16; ++mask) {
        std::vector<std::size_t> set;
        for (std::size_t l = 0; l < 4; ++l)
          if (mask >> l & 1) set.push_back(l);
        for (std::size_t i = 0; i < 3; ++i) {
          const bool before = bucket_set_recovers(code, set, i);
          CHECK(before == bucket_set_recovers(reduced, set, i));
          // Monotone: adding any bucket keeps it recoverable.
          if (before && set.size() < 4) {
            auto bigger = set;
            for (std::size_t l = 0; l < 4; ++l)
              if (!(mask >> l & 1)) { bigger.push_back(l); break; }
            std::sort(bigger.begin(), bigger.end());
            CHECK(bucket_set_recovers(code, bigger, i));
          }
        }
      }
    }
  }
}
