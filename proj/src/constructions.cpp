#include "bacforge/constructions.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace bacforge {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

// Map a possibly negative 0-based index into [0, n).
std::size_t wrap(long long i, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % nn) + nn) % nn);
}

FVector indicator(const PrimeField& field, std::size_t n, std::span<const std::size_t> support) {
  std::vector<Residue> e(n, 0);
  for (auto i : support) e[i] = 1;
  return FVector(field, std::move(e));
}

FVector embed(const PrimeField& field, const FVector& col, std::size_t offset, std::size_t total) {
  std::vector<Residue> e(total, 0);
  std::copy(col.begin(), col.end(), e.begin() + static_cast<std::ptrdiff_t>(offset));
  return FVector(field, std::move(e));
}

RecoveryPlan certified_or_throw(const CodeSpec& code, const BatchRequest& request, RecoveryPlan plan) {
  if (!certify_plan(code, request, plan, ResponseModel::Linear)) {
    throw std::logic_error("constructed plan failed certification");
  }
  return plan;
}

}  // namespace

CodeSpec trivial_replication(std::size_t n, std::size_t k, PrimeField field) {
  if (n == 0 || k == 0) throw std::invalid_argument("replication needs n, k >= 1");
  Bucket all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(FVector::unit(n, i));
  return CodeSpec(field, n, std::vector<Bucket>(k, all));
}

CodeSpec single_request_code(std::size_t n, std::size_t m, PrimeField field) {
  if (n == 0 || m == 0) throw std::invalid_argument("single-request code needs n, m >= 1");
  if (m > n) throw std::invalid_argument("m = " + str(m) + " > n = " + str(n) + " would leave a bucket empty");
  std::vector<Bucket> buckets(m);
  for (std::size_t i = 0; i < n; ++i) buckets[i % m].push_back(FVector::unit(n, i));
  return CodeSpec(field, n, std::move(buckets));
}

CodeSpec parity_code_k2(std::size_t m, PrimeField field) {
  if (m < 3) throw std::invalid_argument("parity code needs m >= 3");
  const std::size_t n = m - 1;
  std::vector<Bucket> buckets;
  for (std::size_t i = 0; i < n; ++i) buckets.push_back({FVector::unit(n, i)});
  buckets.push_back({FVector(field, std::vector<Residue>(n, 1))});
  return CodeSpec(field, n, std::move(buckets));
}

// ---- cyclic shifted sets ----

CyclicParams CyclicParams::make(std::size_t n, std::size_t k, std::size_t m) {
  if (n == 0 || k == 0) throw std::invalid_argument("cyclic code needs n, k >= 1");
  if (n % k != 0) throw std::invalid_argument("cyclic code needs k | n (k = " + str(k) + ", n = " + str(n) + ")");
  if (!(k < m && m < 2 * k)) throw std::invalid_argument("cyclic code needs k < m < 2k (k = " + str(k) + ", m = " + str(m) + ")");
  if (k % (m - k) != 0) throw std::invalid_argument("cyclic code needs (m-k) | k (m-k = " + str(m - k) + ", k = " + str(k) + ")");
  return CyclicParams{n, k, m};
}

std::vector<std::vector<std::size_t>> CyclicParams::shift_sets() const {
  const std::size_t w = n / k;
  std::vector<std::vector<std::size_t>> sets(k);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t a = 0; a < m - k; ++a) {
      for (std::size_t b = 0; b < w; ++b) sets[l].push_back(((l + a) * w + b) % n);
    }
    std::sort(sets[l].begin(), sets[l].end());
  }
  return sets;
}

std::vector<std::size_t> CyclicParams::omitted(std::size_t l) const {
  if (l >= k) throw std::out_of_range("plain bucket index out of range");
  return shift_sets()[k - 1 - l];
}

CodeSpec cyclic_shift_code(const CyclicParams& params, PrimeField field) {
  const auto p = CyclicParams::make(params.n, params.k, params.m);
  const auto sets = p.shift_sets();
  std::vector<Bucket> buckets;
  for (std::size_t l = 0; l < p.k; ++l) {
    const auto& skip = sets[p.k - 1 - l];
    Bucket b;
    for (std::size_t i = 0; i < p.n; ++i) {
      if (!std::binary_search(skip.begin(), skip.end(), i)) b.push_back(FVector::unit(p.n, i));
    }
    buckets.push_back(std::move(b));
  }
  const std::size_t width = p.block();
  const std::size_t terms = p.k / (p.m - p.k);
  Bucket sums;
  for (std::size_t b = 0; b < width; ++b) {
    std::vector<std::size_t> support;
    for (std::size_t t = 0; t < terms; ++t) support.push_back(t * width + b);
    sums.push_back(indicator(field, p.n, support));
  }
  for (std::size_t l = p.k; l < p.m; ++l) buckets.push_back(sums);
  return CodeSpec(field, p.n, std::move(buckets));
}

RecoveryPlan cyclic_certified_plan(const CyclicParams& params, const CodeSpec& code, const BatchRequest& request) {
  const auto p = CyclicParams::make(params.n, params.k, params.m);
  if (code.n() != p.n || code.m() != p.m) throw std::invalid_argument("code does not match cyclic parameters");
  for (std::size_t l = 0; l < p.m; ++l) {
    const std::size_t expected = l < p.k ? p.n - p.block() : p.block();
    if (code.bucket_size(l) != expected) throw std::invalid_argument("code does not match cyclic parameters");
  }
  if (request.size() != p.k) throw std::invalid_argument("request size must equal k = " + str(p.k));

  const auto sets = p.shift_sets();
  auto holds = [&](std::size_t l, std::size_t symbol) {
    const auto& skip = sets[p.k - 1 - l];
    return !std::binary_search(skip.begin(), skip.end(), symbol);
  };

  // Augmenting-path matching of the first 2k-m requests into plain buckets holding their symbol.
  const std::size_t matched = 2 * p.k - p.m;
  std::vector<int> owner(p.k, -1);  // bucket -> request
  std::vector<bool> visited;
  auto augment = [&](auto&& self, std::size_t j) -> bool {
    for (std::size_t l = 0; l < p.k; ++l) {
      if (visited[l] || !holds(l, request.indices[j])) continue;
      visited[l] = true;
      if (owner[l] < 0 || self(self, static_cast<std::size_t>(owner[l]))) {
        owner[l] = static_cast<int>(j);
        return true;
      }
    }
    return false;
  };
  for (std::size_t j = 0; j < matched; ++j) {
    visited.assign(p.k, false);
    if (!augment(augment, j)) throw std::logic_error("no complete matching; degree condition violated");
  }

  std::vector<std::vector<std::size_t>> parts(p.k);
  for (std::size_t l = 0; l < p.k; ++l) {
    if (owner[l] >= 0) parts[static_cast<std::size_t>(owner[l])] = {l};
  }
  std::size_t next_sum = p.k;
  std::size_t j = matched;
  for (std::size_t l = 0; l < p.k; ++l) {
    if (owner[l] >= 0) continue;
    parts[j] = {l};
    if (!holds(l, request.indices[j])) parts[j].push_back(next_sum++);
    ++j;
  }
  auto cores = parts;
  for (; next_sum < p.m; ++next_sum) parts.back().push_back(next_sum);
  return certified_or_throw(code, request, realize_linear_plan(code, request, std::move(parts), cores));
}

CodeSpec uniform_code(std::size_t n, std::size_t k, PrimeField field) {
  if (n == 0 || k == 0 || n % (k * (k + 1)) != 0) {
    throw std::invalid_argument("uniform code needs k(k+1) | n (k = " + str(k) + ", n = " + str(n) + ")");
  }
  const std::size_t n0 = n / (k + 1);
  const CodeSpec base = cyclic_shift_code(CyclicParams::make(n0, k, k + 1), field);
  std::vector<Bucket> buckets(k + 1);
  for (std::size_t l = 0; l <= k; ++l) {
    for (std::size_t j = 0; j <= k; ++j) {
      for (const auto& col : base.bucket((l + (k + 1) - j) % (k + 1))) {
        buckets[l].push_back(embed(field, col, j * n0, n));
      }
    }
  }
  return CodeSpec(field, n, std::move(buckets));
}

// ---- good vectors ----

bool is_good_vector(std::span<const std::size_t> v, std::size_t t) {
  if (t == 0) return false;
  const bool with_zero = v.size() == 2 * t + 1;
  if (!with_zero && v.size() != 2 * t) return false;
  std::vector<std::size_t> first(t + 1, 0), count(t + 1, 0);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = v[i];
    if (j > t) return false;
    if (j == 0) {
      ++zeros;
      continue;
    }
    if (count[j]++ == 0) {
      first[j] = i;
    } else if (i - first[j] != j) {
      return false;
    }
  }
  if (zeros != (with_zero ? 1u : 0u)) return false;
  for (std::size_t j = 1; j <= t; ++j) {
    if (count[j] != 2) return false;
  }
  return true;
}

GoodVector GoodVector::make(std::vector<std::size_t> entries) {
  const std::size_t t = entries.empty() ? 0 : *std::max_element(entries.begin(), entries.end());
  if (!is_good_vector(entries, t)) throw std::invalid_argument("not a good vector");
  GoodVector g{t, std::move(entries), std::vector<std::size_t>(t + 1, 0)};
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    if (g.entries[i] != 0) g.last_occurrence[g.entries[i]] = i + 1;
  }
  return g;
}

std::vector<std::vector<std::size_t>> enumerate_good_vectors(std::size_t t, std::size_t len) {
  if (t == 0 || (len != 2 * t && len != 2 * t + 1)) {
    throw std::invalid_argument("good vectors w.r.t. t have length 2t or 2t+1");
  }
  constexpr std::size_t empty = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slots(len, empty);
  std::vector<bool> used(t + 1, false);
  bool zero_free = len == 2 * t + 1;
  std::vector<std::vector<std::size_t>> out;

  auto place = [&](auto&& self, std::size_t pos) -> void {
    while (pos < len && slots[pos] != empty) ++pos;
    if (pos == len) {
      out.push_back(slots);
      return;
    }
    if (zero_free) {
      zero_free = false;
      slots[pos] = 0;
      self(self, pos + 1);
      slots[pos] = empty;
      zero_free = true;
    }
    for (std::size_t j = 1; j <= t; ++j) {
      if (used[j] || pos + j >= len || slots[pos + j] != empty) continue;
      used[j] = true;
      slots[pos] = slots[pos + j] = j;
      self(self, pos + 1);
      slots[pos] = slots[pos + j] = empty;
      used[j] = false;
    }
  };
  place(place, 0);
  std::sort(out.begin(), out.end());
  return out;
}

GoodVector good_vector_2t1(std::size_t t) {
  if (t == 0) throw std::invalid_argument("t must be at least 1");
  const std::size_t odd_top = t % 2 == 1 ? t : t - 1;
  const std::size_t even_top = t % 2 == 0 ? t : t - 1;
  std::vector<std::size_t> v;
  for (std::size_t j = odd_top + 2; j > 1; j -= 2) v.push_back(j - 2);
  for (std::size_t j = 1; j <= odd_top; j += 2) v.push_back(j);
  for (std::size_t j = even_top + 2; j > 2; j -= 2) v.push_back(j - 2);
  v.push_back(0);
  for (std::size_t j = 2; j <= even_top; j += 2) v.push_back(j);
  return GoodVector::make(std::move(v));
}

std::size_t good_vector_code_length(const GoodVector& v) noexcept {
  return v.entries.size() == 2 * v.t ? 4 * v.t + 1 : 4 * v.t + 2;
}

CodeSpec good_vector_code(const GoodVector& v, PrimeField field) {
  if (!is_good_vector(v.entries, v.t)) throw std::invalid_argument("not a good vector");
  const std::size_t n = good_vector_code_length(v);
  const auto t = static_cast<long long>(v.t);
  std::vector<Bucket> buckets(n);
  for (std::size_t i = 0; i < n; ++i) {
    buckets[i].push_back(FVector::unit(n, i));
    for (std::size_t j = 1; j <= v.t; ++j) {
      const long long base = static_cast<long long>(i) - t - static_cast<long long>(v.last_occurrence[j]);
      const std::size_t support[] = {wrap(base, n), wrap(base + static_cast<long long>(j), n)};
      buckets[i].push_back(indicator(field, n, support));
    }
  }
  return CodeSpec(field, n, std::move(buckets));
}

BatchThreshold max_batch_k(std::size_t t) {
  if (t == 0) throw std::invalid_argument("t must be at least 1");
  auto admissible = [t](std::size_t k) {
    for (std::size_t d = 1; d <= k; ++d) {
      if (2 * k > 2 * t + d + (k + d - 1) / d) return false;
    }
    return true;
  };
  std::size_t best = 1;
  for (std::size_t k = 1; k <= 2 * t + 1; ++k) {
    if (admissible(k)) best = k;
  }
  std::size_t s = 0;
  while ((s + 1) * (s + 1) <= 4 * t + 1) ++s;
  return {best, t + (1 + s) / 2};
}

namespace {

struct PairSet {
  std::size_t plain;   // bucket whose plain symbol is the partner
  std::size_t parity;  // bucket holding partner + x_i as its column j
  std::size_t column;
};

std::vector<PairSet> canonical_pairs(const GoodVector& v, std::size_t i) {
  const std::size_t n = good_vector_code_length(v);
  const auto ii = static_cast<long long>(i);
  const auto t = static_cast<long long>(v.t);
  std::vector<PairSet> out;
  for (std::size_t j = 1; j <= v.t; ++j) {
    const auto jj = static_cast<long long>(j);
    const auto last = static_cast<long long>(v.last_occurrence[j]);
    out.push_back({wrap(ii - jj, n), wrap(ii + t + last - jj, n), j});
    out.push_back({wrap(ii + jj, n), wrap(ii + t + last, n), j});
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> canonical_recovery_sets(const GoodVector& v, std::size_t i) {
  if (i >= good_vector_code_length(v)) throw std::out_of_range("symbol index out of range");
  std::vector<std::vector<std::size_t>> out{{i}};
  for (const auto& p : canonical_pairs(v, i)) out.push_back({std::min(p.plain, p.parity), std::max(p.plain, p.parity)});
  return out;
}

RecoveryPlan goodvec_certified_plan(const GoodVector& v, const CodeSpec& code, const BatchRequest& request) {
  const std::size_t n = good_vector_code_length(v);
  if (code.n() != n || code.m() != n) throw std::invalid_argument("code does not match the good vector");
  for (std::size_t l = 0; l < n; ++l) {
    if (code.bucket_size(l) != v.t + 1) throw std::invalid_argument("code does not match the good vector");
  }
  const std::size_t k = request.size();
  for (auto i : request.indices) {
    if (i >= n) throw std::invalid_argument("request index out of range");
  }

  std::map<std::size_t, std::size_t> multiplicity;
  for (auto i : request.indices) ++multiplicity[i];
  const std::size_t distinct = multiplicity.size();
  // The greedy argument needs 2k <= 2t + D + ceil(k/D) for this request's D distinct symbols.
  if (2 * k > 2 * v.t + distinct + (k + distinct - 1) / distinct) {
    throw std::invalid_argument("request of size " + str(k) + " with " + str(distinct) +
                                " distinct symbols exceeds the good-vector threshold at t = " + str(v.t));
  }

  std::vector<std::pair<std::size_t, std::size_t>> order(multiplicity.begin(), multiplicity.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  std::vector<bool> taken(n, false);
  for (const auto& [i, a] : order) taken[i] = true;
  std::map<std::size_t, std::vector<PairSet>> extra;
  for (const auto& [i, a] : order) {
    auto pairs = canonical_pairs(v, i);
    std::sort(pairs.begin(), pairs.end(), [](const PairSet& x, const PairSet& y) {
      return std::minmax(x.plain, x.parity) < std::minmax(y.plain, y.parity);
    });
    for (std::size_t need = a - 1; need > 0; --need) {
      auto it = std::find_if(pairs.begin(), pairs.end(), [&](const PairSet& p) { return !taken[p.plain] && !taken[p.parity]; });
      if (it == pairs.end()) throw std::logic_error("greedy selection ran out of disjoint recovery sets");
      taken[it->plain] = taken[it->parity] = true;
      extra[i].push_back(*it);
      pairs.erase(it);
    }
  }

  RecoveryPlan plan;
  for (std::size_t l = 0; l < n; ++l) plan.responses.push_back(FVector::zero(v.t + 1));
  const Residue minus_one = code.field().neg(1);
  std::map<std::size_t, std::size_t> served;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = request.indices[j];
    const std::size_t copy = served[i]++;
    if (copy == 0) {
      plan.sets.push_back({i});
      plan.combos.push_back({1});
      plan.responses[i] = FVector::unit(v.t + 1, 0);
      continue;
    }
    const PairSet& p = extra[i][copy - 1];
    plan.responses[p.plain] = FVector::unit(v.t + 1, 0);
    plan.responses[p.parity] = FVector::unit(v.t + 1, p.column);
    if (p.plain < p.parity) {
      plan.sets.push_back({p.plain, p.parity});
      plan.combos.push_back({minus_one, 1});
    } else {
      plan.sets.push_back({p.parity, p.plain});
      plan.combos.push_back({1, minus_one});
    }
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (taken[l]) continue;
    plan.sets.back().push_back(l);
    plan.combos.back().push_back(0);
  }
  // Keep the folded part sorted with its coefficients.
  auto& last = plan.sets.back();
  auto& weights = plan.combos.back();
  std::vector<std::pair<std::size_t, Residue>> zipped;
  for (std::size_t a = 0; a < last.size(); ++a) zipped.emplace_back(last[a], weights[a]);
  std::sort(zipped.begin(), zipped.end());
  for (std::size_t a = 0; a < zipped.size(); ++a) std::tie(last[a], weights[a]) = zipped[a];
  return certified_or_throw(code, request, std::move(plan));
}

// ---- gadget composition ----

CodeSpec compose_parallel(const CodeSpec& a, const CodeSpec& b) {
  if (!(a.field() == b.field())) throw std::invalid_argument("codes are over different fields");
  if (a.n() != b.n()) throw std::invalid_argument("parallel composition needs equal n");
  auto buckets = a.buckets();
  buckets.insert(buckets.end(), b.buckets().begin(), b.buckets().end());
  return CodeSpec(a.field(), a.n(), std::move(buckets));
}

CodeSpec compose_concat(const CodeSpec& a, const CodeSpec& b) {
  if (!(a.field() == b.field())) throw std::invalid_argument("codes are over different fields");
  const std::size_t n = a.n() + b.n();
  std::vector<Bucket> buckets;
  for (const auto& bucket : a.buckets()) {
    Bucket out;
    for (const auto& col : bucket) out.push_back(embed(a.field(), col, 0, n));
    buckets.push_back(std::move(out));
  }
  for (const auto& bucket : b.buckets()) {
    Bucket out;
    for (const auto& col : bucket) out.push_back(embed(a.field(), col, a.n(), n));
    buckets.push_back(std::move(out));
  }
  return CodeSpec(a.field(), n, std::move(buckets));
}

CodeSpec compose_repeat(const CodeSpec& c, std::size_t count) {
  if (count == 0) throw std::invalid_argument("repeat count must be at least 1");
  const std::size_t n = c.n() * count;
  std::vector<Bucket> buckets(c.m());
  for (std::size_t l = 0; l < c.m(); ++l) {
    for (std::size_t copy = 0; copy < count; ++copy) {
      for (const auto& col : c.bucket(l)) buckets[l].push_back(embed(c.field(), col, copy * c.n(), n));
    }
  }
  return CodeSpec(c.field(), n, std::move(buckets));
}

}  // namespace bacforge
