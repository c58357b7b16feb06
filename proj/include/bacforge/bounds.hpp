#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bacforge {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Lower bounds on the length of PIR array codes (hence also of BACs). Exact arithmetic throughout.

Rational lb_general(std::uint64_t n, std::uint64_t k, std::uint64_t m);   // m >= k
Rational lb_midrange(std::uint64_t n, std::uint64_t k, std::uint64_t m);  // k < m < 2k
Rational lb_kplus2(std::uint64_t n, std::uint64_t k);                     // m = k+2, k >= 3
/// (k - 1/2) n: a bound for projection-only batch codes, informational only.
Rational projection_batch_bound(std::uint64_t n, std::uint64_t k);

BigInt ceil(const Rational& r);

struct LowerBound {
  Rational value;
  std::string source;  // "general", "midrange" or "kplus2"
};
LowerBound best_lower_bound(std::uint64_t n, std::uint64_t k, std::uint64_t m);

struct UpperBound {
  std::uint64_t length;
  std::string family;
  bool pir_only = false;  // achieved by a PIR array code, not known as a BAC
};
/// Least N among closed forms whose preconditions hold exactly, including monotonicity in m
/// and the gadget scalings. nullopt when nothing applies.
std::optional<UpperBound> ub_constructions(std::uint64_t n, std::uint64_t k, std::uint64_t m);

struct BoundReport {
  std::uint64_t n = 0, k = 0, m = 0;
  LowerBound lower;
  BigInt lower_ceil;
  std::optional<UpperBound> upper;
  bool optimal = false;
};
BoundReport bound_report(std::uint64_t n, std::uint64_t k, std::uint64_t m);

enum class MRule { KPlus1, KPlus2, All };
MRule parse_m_rule(const std::string& text);

struct Range {
  std::uint64_t lo = 1, hi = 1;
};
Range parse_range(const std::string& text);  // "a..b" or "a"

/// Rows ordered by n, k, m. m ranges over k+1, k+2 or [k, 2k].
std::vector<BoundReport> bound_table(Range n_range, Range k_range, MRule rule, unsigned jobs = 1);

std::string bound_table_csv(const std::vector<BoundReport>& rows);

}  // namespace bacforge
