#include "bacforge/bounds.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "bacforge/constructions.hpp"

namespace bacforge {

namespace {

Rational frac(std::uint64_t num, std::uint64_t den) { return Rational(BigInt(num), BigInt(den)); }

BigInt binom(std::uint64_t a, std::uint64_t b) {
  if (b > a) return 0;
  BigInt r = 1;
  for (std::uint64_t i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

bool length_2t_good_vector_exists(std::size_t t) {
  static std::mutex guard;
  static std::map<std::size_t, bool> cache;
  std::lock_guard lock(guard);
  auto it = cache.find(t);
  if (it != cache.end()) return it->second;
  // Exhaustive search only stays cheap for small t; larger t are simply not claimed.
  const bool exists = t <= 6 && !enumerate_good_vectors(t, 2 * t).empty();
  cache.emplace(t, exists);
  return exists;
}

using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;

void consider(std::optional<UpperBound>& best, const UpperBound& cand) {
  if (!best) {
    best = cand;
    return;
  }
  if (cand.length < best->length || (cand.length == best->length && best->pir_only && !cand.pir_only)) best = cand;
}

std::optional<UpperBound> direct(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  std::optional<UpperBound> best;
  if (m == k) consider(best, {k * n, "replication", false});
  if (k == 1 && m <= n) consider(best, {n, "single", false});
  if (k == 2 && m >= 3 && n % (m - 1) == 0) consider(best, {m * n / (m - 1), "parity", false});
  if (k < m && m < 2 * k && n % k == 0 && k % (m - k) == 0) {
    const std::uint64_t len = (2 * k - m) * n + (m - k) * (m - k) * n / k;
    consider(best, {len, "cyclic", false});
    if (m == k + 1 && n % (k * (k + 1)) == 0) consider(best, {len, "uniform", false});
  }
  // Good-vector codes on m = 4t+1 or 4t+2 buckets, repeated n/m times.
  if (n % m == 0) {
    std::optional<std::size_t> t;
    if (m % 4 == 2 && m >= 6) t = (m - 2) / 4;
    if (m % 4 == 1 && m >= 5 && length_2t_good_vector_exists((m - 1) / 4)) t = (m - 1) / 4;
    if (t) {
      if (k <= max_batch_k(*t).k) {
        consider(best, {(*t + 1) * n, "goodvec", false});
      } else if (k <= 2 * *t + 1) {
        consider(best, {(*t + 1) * n, "goodvec-pir", true});
      }
    }
  }
  // Good-vector PIR code in parallel with the cyclic code used as a PIR code.
  if (2 * m > 3 * k && m < 2 * k && (2 * m - 3 * k) % 2 == 1) {
    const std::uint64_t l = std::lcm(4 * m - 6 * k, 4 * k - 2 * m);
    if (n % l == 0) consider(best, {(3 * k - m + 1) * n / 2, "combined-pir", true});
  }
  return best;
}

class UpperBoundSolver {
 public:
  std::optional<UpperBound> solve(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
    const Key key{n, k, m};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<UpperBound> best = direct(n, k, m);
    // Fewer buckets: split buckets of a shorter-m code, as long as N >= m.
    for (std::uint64_t mm = k; mm < m; ++mm) {
      if (auto sub = solve(n, k, mm); sub && sub->length >= m) {
        consider(best, {sub->length, "monotone(" + sub->family + ",m=" + std::to_string(mm) + ")", sub->pir_only});
      }
    }
    for (std::uint64_t c = 2; c <= k; ++c) {
      if (k % c != 0 || m % c != 0) continue;
      if (auto sub = solve(n, k / c, m / c)) {
        consider(best, {c * sub->length, "parallel" + std::to_string(c) + "(" + sub->family + ")", sub->pir_only});
      }
    }
    for (std::uint64_t c = 2; c <= n; ++c) {
      if (n % c != 0) continue;
      if (auto sub = solve(n / c, k, m)) {
        consider(best, {c * sub->length, "repeat" + std::to_string(c) + "(" + sub->family + ")", sub->pir_only});
      }
    }
    memo_.emplace(key, best);
    return best;
  }

 private:
  std::map<Key, std::optional<UpperBound>> memo_;
};

}  // namespace

Rational lb_general(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  if (n == 0 || k == 0 || m < k) throw std::invalid_argument("lb_general needs n, k >= 1 and m >= k");
  return frac(m * n, m - k + 1);
}

Rational lb_midrange(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  if (n == 0 || !(k < m && m < 2 * k)) throw std::invalid_argument("lb_midrange needs k < m < 2k");
  return (Rational(2 * k - m) + Rational(BigInt(1), binom(m - 1, 2 * k - m))) * n;
}

Rational lb_kplus2(std::uint64_t n, std::uint64_t k) {
  if (n == 0 || k < 3) throw std::invalid_argument("lb_kplus2 needs k >= 3");
  return (Rational(k - 2) + frac(4 * k + 16, 3 * k * k + k + 4)) * n;
}

Rational projection_batch_bound(std::uint64_t n, std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  return (Rational(k) - frac(1, 2)) * n;
}

BigInt ceil(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;
  if (q * den < num) ++q;
  return q;
}

LowerBound best_lower_bound(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  LowerBound best{lb_general(n, k, m), "general"};
  if (k < m && m < 2 * k) {
    if (auto v = lb_midrange(n, k, m); v > best.value) best = {v, "midrange"};
  }
  if (m == k + 2 && k >= 3) {
    if (auto v = lb_kplus2(n, k); v > best.value) best = {v, "kplus2"};
  }
  return best;
}

std::optional<UpperBound> ub_constructions(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  if (n == 0 || k == 0 || m < k) return std::nullopt;
  UpperBoundSolver solver;
  return solver.solve(n, k, m);
}

BoundReport bound_report(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  BoundReport r{n, k, m, best_lower_bound(n, k, m), 0, ub_constructions(n, k, m), false};
  r.lower_ceil = ceil(r.lower.value);
  r.optimal = r.upper && BigInt(r.upper->length) == r.lower_ceil;
  return r;
}

MRule parse_m_rule(const std::string& text) {
  if (text == "k+1") return MRule::KPlus1;
  if (text == "k+2") return MRule::KPlus2;
  if (text == "all") return MRule::All;
  throw std::invalid_argument("m-rule must be k+1, k+2 or all");
}

Range parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    Range r;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const auto a = text.substr(0, dots), b = text.substr(dots + 2);
      r.lo = std::stoull(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stoull(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
    if (r.lo == 0 || r.lo > r.hi) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad range '" + text + "', expected a..b with 1 <= a <= b");
  }
}

std::vector<BoundReport> bound_table(Range n_range, Range k_range, MRule rule, unsigned jobs) {
  std::vector<Key> keys;
  for (auto n = n_range.lo; n <= n_range.hi; ++n) {
    for (auto k = k_range.lo; k <= k_range.hi; ++k) {
      switch (rule) {
        case MRule::KPlus1: keys.emplace_back(n, k, k + 1); break;
        case MRule::KPlus2: keys.emplace_back(n, k, k + 2); break;
        case MRule::All:
          for (auto m = k; m <= 2 * k; ++m) keys.emplace_back(n, k, m);
          break;
      }
    }
  }
  std::vector<BoundReport> rows(keys.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  auto worker = [&](unsigned shard) {
    UpperBoundSolver solver;
    for (std::size_t i = shard; i < keys.size(); i += jobs) {
      const auto [n, k, m] = keys[i];
      BoundReport r{n, k, m, best_lower_bound(n, k, m), 0, solver.solve(n, k, m), false};
      r.lower_ceil = ceil(r.lower.value);
      r.optimal = r.upper && BigInt(r.upper->length) == r.lower_ceil;
      rows[i] = std::move(r);
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < jobs; ++s) pool.emplace_back(worker, s);
  }
  return rows;
}

std::string bound_table_csv(const std::vector<BoundReport>& rows) {
  std::ostringstream out;
  out << "n,k,m,lb_num,lb_den,lb_ceil,lb_source,ub,ub_source,optimal\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.k << ',' << r.m << ',' << boost::multiprecision::numerator(r.lower.value) << ','
        << boost::multiprecision::denominator(r.lower.value) << ',' << r.lower_ceil << ',' << r.lower.source << ',';
    if (r.upper) {
      out << r.upper->length << ",\"" << r.upper->family << "\",";
    } else {
      out << ",,";
    }
    out << (r.optimal ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace bacforge
