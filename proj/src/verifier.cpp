#include "bacforge/verifier.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace bacforge {

namespace {

using Mask = std::uint64_t;

std::vector<std::size_t> bits_of(Mask mask) {
  std::vector<std::size_t> out;
  while (mask != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

void require_searchable(const CodeSpec& code, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > code.m()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds m = " + std::to_string(code.m()) +
                                "; no partition into k non-empty parts");
  }
}

// Lexicographic enumeration of c-subsets of `pool`, as masks.
template <typename F>
bool for_each_combination(const std::vector<std::size_t>& pool, std::size_t c, F&& visit) {
  const std::size_t n = pool.size();
  if (c == 0 || c > n) return false;
  std::vector<std::size_t> idx(c);
  for (std::size_t i = 0; i < c; ++i) idx[i] = i;
  while (true) {
    Mask mask = 0;
    for (auto i : idx) mask |= Mask{1} << pool[i];
    if (visit(mask)) return true;
    std::size_t pos = c;
    while (pos > 0 && idx[pos - 1] == n - c + (pos - 1)) --pos;
    if (pos == 0) return false;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < c; ++i) idx[i] = idx[i - 1] + 1;
  }
}

// Odometer over one column choice per listed bucket; visit returns true to stop.
template <typename F>
bool for_each_projection(const CodeSpec& code, const std::vector<std::size_t>& buckets, F&& visit) {
  for (auto l : buckets) {
    if (code.bucket_size(l) == 0) return false;
  }
  std::vector<std::size_t> choice(buckets.size(), 0);
  while (true) {
    if (visit(choice)) return true;
    std::size_t pos = 0;
    while (pos < buckets.size()) {
      if (++choice[pos] < code.bucket_size(buckets[pos])) break;
      choice[pos] = 0;
      ++pos;
    }
    if (pos == buckets.size()) return false;
  }
}

}  // namespace

BatchRequest BatchRequest::make(std::vector<std::size_t> indices, std::size_t n) {
  if (indices.empty()) throw std::invalid_argument("request must contain at least one index");
  for (auto i : indices) {
    if (i >= n) {
      throw std::invalid_argument("request index " + std::to_string(i + 1) + " outside [1, " +
                                  std::to_string(n) + "]");
    }
  }
  std::sort(indices.begin(), indices.end());
  return BatchRequest{std::move(indices)};
}

bool certify_plan(const CodeSpec& code, const BatchRequest& request, const RecoveryPlan& plan,
                  ResponseModel model) {
  const std::size_t m = code.m();
  const std::size_t k = request.size();
  if (plan.responses.size() != m) throw std::invalid_argument("plan has wrong number of responses");
  for (std::size_t l = 0; l < m; ++l) {
    if (plan.responses[l].size() != code.bucket_size(l)) {
      throw std::invalid_argument("response " + std::to_string(l + 1) + " has wrong length");
    }
  }
  if (plan.combos.size() != plan.sets.size()) throw std::invalid_argument("combos do not align with sets");
  for (std::size_t j = 0; j < plan.sets.size(); ++j) {
    if (plan.combos[j].size() != plan.sets[j].size()) {
      throw std::invalid_argument("combos do not align with set " + std::to_string(j + 1));
    }
  }
  for (auto i : request.indices) {
    if (i >= code.n()) throw std::invalid_argument("request index out of range");
  }

  // (a) exact partition into k non-empty parts.
  if (plan.sets.size() != k) return false;
  std::vector<bool> seen(m, false);
  std::size_t covered = 0;
  for (const auto& part : plan.sets) {
    if (part.empty()) return false;
    for (auto l : part) {
      if (l >= m || seen[l]) return false;
      seen[l] = true;
      ++covered;
    }
  }
  if (covered != m) return false;

  // (c) projection responses read one stored symbol verbatim.
  if (model == ResponseModel::ProjectionOnly) {
    for (const auto& r : plan.responses) {
      if (!r.is_zero() && !r.unit_index()) return false;
    }
  }

  // (b) Σ combo · (G_l · r_l) = e_{i_j}.
  const auto& field = code.field();
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<Residue> acc(code.n(), 0);
    for (std::size_t a = 0; a < plan.sets[j].size(); ++a) {
      const std::size_t l = plan.sets[j][a];
      const Residue c = plan.combos[j][a] % field.modulus();
      if (c == 0) continue;
      const auto& bucket = code.bucket(l);
      for (std::size_t s = 0; s < bucket.size(); ++s) {
        const Residue w = field.mul(c, plan.responses[l][s]);
        if (w == 0) continue;
        for (std::size_t i = 0; i < code.n(); ++i) acc[i] = field.add(acc[i], field.mul(w, bucket[s][i]));
      }
    }
    for (std::size_t i = 0; i < code.n(); ++i) {
      if (acc[i] != (i == request.indices[j] ? 1u : 0u)) return false;
    }
  }
  return true;
}

PlanSearch::PlanSearch(const CodeSpec& code, ResponseModel model) : code_(&code), model_(model) {
  if (code.m() > 64) throw std::invalid_argument("exhaustive search supports at most 64 buckets");
}

PlanSearch::Symbols PlanSearch::compute_recoverable(Mask mask) const {
  const auto& code = *code_;
  Symbols out(code.n());
  const auto buckets = bits_of(mask);
  if (model_ == ResponseModel::Linear) {
    Subspace span(code.field(), code.n());
    for (auto l : buckets) {
      for (const auto& col : code.bucket(l)) span.insert(col);
    }
    for (std::size_t i = 0; i < code.n(); ++i) {
      if (span.contains_unit(i)) out.set(i);
    }
    return out;
  }
  // Any column dominates the zero response, so only full choices matter.
  for_each_projection(code, buckets, [&](const std::vector<std::size_t>& choice) {
    Subspace span(code.field(), code.n());
    for (std::size_t a = 0; a < buckets.size(); ++a) span.insert(code.bucket(buckets[a])[choice[a]]);
    for (std::size_t i = 0; i < code.n(); ++i) {
      if (!out.test(i) && span.contains_unit(i)) out.set(i);
    }
    return out.all();
  });
  return out;
}

const PlanSearch::Symbols& PlanSearch::recoverable(Mask mask) {
  auto it = memo_.find(mask);
  if (it == memo_.end()) it = memo_.emplace(mask, compute_recoverable(mask)).first;
  return it->second;
}

bool PlanSearch::recovers_minimally(Mask set, std::size_t symbol) {
  if (!recoverable(set).test(symbol)) return false;
  if (std::popcount(set) == 1) return true;
  for (Mask rest = set; rest != 0; rest &= rest - 1) {
    const Mask without = set & ~(rest & (~rest + 1));
    if (recoverable(without).test(symbol)) return false;
  }
  return true;
}

PlanSearch::Mask PlanSearch::minimal_core(Mask set, std::size_t symbol) {
  const auto pool = bits_of(set);
  Mask found = set;
  for (std::size_t c = 1; c <= pool.size(); ++c) {
    if (for_each_combination(pool, c, [&](Mask s) {
          if (!recoverable(s).test(symbol)) return false;
          found = s;
          return true;
        })) {
      break;
    }
  }
  return found;
}

bool PlanSearch::search(std::size_t j, Mask remaining, Mask previous) {
  const auto& req = request_->indices;
  const std::size_t k = req.size();
  const std::size_t symbol = req[j];
  if (j + 1 == k) {
    if (!recoverable(remaining).test(symbol)) return false;
    chosen_[j] = remaining;
    return true;
  }
  const bool same_as_previous = j > 0 && req[j - 1] == symbol;
  const auto pool = bits_of(remaining);
  const std::size_t later = k - 1 - j;
  for (std::size_t c = 1; c + later <= pool.size(); ++c) {
    const bool done = for_each_combination(pool, c, [&](Mask s) {
      // Interchangeable identical requests: only take sets in increasing mask order.
      if (same_as_previous && s <= previous) return false;
      if (!recovers_minimally(s, symbol)) return false;
      const Mask rest = remaining & ~s;
      const auto& rec = recoverable(rest);
      for (std::size_t jj = j + 1; jj < k; ++jj) {
        if (!rec.test(req[jj])) return false;
      }
      chosen_[j] = s;
      return search(j + 1, rest, s);
    });
    if (done) return true;
  }
  return false;
}

void PlanSearch::realize_set(Mask core, std::size_t symbol, RecoveryPlan& plan, std::size_t j) const {
  const auto& code = *code_;
  const auto& field = code.field();
  const auto core_buckets = bits_of(core);
  const FVector target = FVector::unit(code.n(), symbol);
  auto assign_combo = [&](std::size_t l, Residue c) {
    const auto& part = plan.sets[j];
    const auto pos = static_cast<std::size_t>(std::find(part.begin(), part.end(), l) - part.begin());
    plan.combos[j][pos] = c;
  };

  if (model_ == ResponseModel::Linear) {
    std::vector<FVector> cols;
    for (auto l : core_buckets) cols.insert(cols.end(), code.bucket(l).begin(), code.bucket(l).end());
    const auto coeffs = span_solve(target, cols, field);
    if (!coeffs) throw std::logic_error("plan search selected a non-recovering set");
    std::size_t offset = 0;
    for (auto l : core_buckets) {
      const std::size_t len = code.bucket_size(l);
      plan.responses[l] = FVector(field, std::vector<Residue>(coeffs->begin() + offset, coeffs->begin() + offset + len));
      offset += len;
      assign_combo(l, 1);
    }
    return;
  }

  const bool ok = for_each_projection(code, core_buckets, [&](const std::vector<std::size_t>& choice) {
    std::vector<FVector> cols;
    for (std::size_t a = 0; a < core_buckets.size(); ++a) cols.push_back(code.bucket(core_buckets[a])[choice[a]]);
    const auto coeffs = span_solve(target, cols, field);
    if (!coeffs) return false;
    for (std::size_t a = 0; a < core_buckets.size(); ++a) {
      const auto l = core_buckets[a];
      plan.responses[l] = FVector::unit(code.bucket_size(l), choice[a]);
      assign_combo(l, (*coeffs)[a]);
    }
    return true;
  });
  if (!ok) throw std::logic_error("plan search selected a non-recovering set");
}

RecoveryPlan PlanSearch::realize() const {
  const auto& code = *code_;
  const std::size_t k = chosen_.size();
  RecoveryPlan plan;
  plan.responses.reserve(code.m());
  for (std::size_t l = 0; l < code.m(); ++l) plan.responses.push_back(FVector::zero(code.bucket_size(l)));
  for (std::size_t j = 0; j < k; ++j) {
    plan.sets.push_back(bits_of(chosen_[j]));
    plan.combos.emplace_back(plan.sets.back().size(), 0);
  }
  return plan;
}

std::optional<RecoveryPlan> PlanSearch::find(const BatchRequest& request) {
  require_searchable(*code_, request.size());
  for (auto i : request.indices) {
    if (i >= code_->n()) throw std::invalid_argument("request index out of range");
  }
  const std::size_t m = code_->m();
  const Mask all = m == 64 ? ~Mask{0} : (Mask{1} << m) - 1;
  request_ = &request;
  chosen_.assign(request.size(), 0);

  const auto& rec = recoverable(all);
  bool feasible = true;
  for (auto i : request.indices) feasible = feasible && rec.test(i);
  if (!feasible || !search(0, all, 0)) {
    request_ = nullptr;
    return std::nullopt;
  }

  // The last part keeps every leftover bucket; only a minimal core of it responds.
  const std::size_t last = request.size() - 1;
  const Mask last_core = minimal_core(chosen_[last], request.indices[last]);
  RecoveryPlan plan = realize();
  for (std::size_t j = 0; j < request.size(); ++j) {
    realize_set(j == last ? last_core : chosen_[j], request.indices[j], plan, j);
  }
  request_ = nullptr;
  return plan;
}

std::optional<RecoveryPlan> find_plan(const CodeSpec& code, const BatchRequest& request,
                                      ResponseModel model) {
  PlanSearch search(code, model);
  return search.find(request);
}

bool next_multiset(std::vector<std::size_t>& indices, std::size_t n) {
  std::size_t pos = indices.size();
  while (pos > 0 && indices[pos - 1] + 1 >= n) --pos;
  if (pos == 0) return false;
  const std::size_t v = indices[pos - 1] + 1;
  for (std::size_t i = pos - 1; i < indices.size(); ++i) indices[i] = v;
  return true;
}

namespace {

void require_verifiable(const CodeSpec& code, std::size_t k) {
  require_searchable(code, k);
  for (std::size_t l = 0; l < code.m(); ++l) {
    if (code.bucket_size(l) == 0) {
      throw std::invalid_argument("bucket " + std::to_string(l + 1) + " is empty");
    }
  }
}

template <typename Producer>
VerificationReport run_sharded(const CodeSpec& code, ResponseModel model, unsigned jobs, Producer produce) {
  const auto start = std::chrono::steady_clock::now();
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

  VerificationReport report;
  std::mutex merge;
  auto worker = [&](unsigned shard) {
    PlanSearch search(code, model);
    std::size_t checked = 0;
    std::vector<VerificationFailure> failures;
    produce([&](std::size_t ordinal, const BatchRequest& request) {
      if (ordinal % jobs != shard) return;
      ++checked;
      if (!search.find(request)) failures.push_back({request, "no-partition"});
    });
    std::lock_guard lock(merge);
    report.total_requests += checked;
    for (auto& f : failures) report.failures.push_back(std::move(f));
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned s = 0; s < jobs; ++s) threads.emplace_back(worker, s);
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const auto& a, const auto& b) { return a.request < b.request; });
  report.elapsed = std::chrono::steady_clock::now() - start;
  return report;
}

}  // namespace

VerificationReport verify_bac(const CodeSpec& code, std::size_t k, ResponseModel model, unsigned jobs) {
  require_verifiable(code, k);
  return run_sharded(code, model, jobs, [&](auto&& visit) {
    BatchRequest request{std::vector<std::size_t>(k, 0)};
    std::size_t ordinal = 0;
    do {
      visit(ordinal++, request);
    } while (next_multiset(request.indices, code.n()));
  });
}

VerificationReport verify_pir(const CodeSpec& code, std::size_t k, ResponseModel model, unsigned jobs) {
  require_verifiable(code, k);
  return run_sharded(code, model, jobs, [&](auto&& visit) {
    for (std::size_t i = 0; i < code.n(); ++i) visit(i, BatchRequest{std::vector<std::size_t>(k, i)});
  });
}

bool check_subset_spanning(const CodeSpec& code, std::size_t k) {
  if (k == 0 || k > code.m()) throw std::invalid_argument("check_subset_spanning needs 1 <= k <= m");
  const std::size_t size = code.m() - k + 1;
  std::vector<std::size_t> pool(code.m());
  for (std::size_t l = 0; l < pool.size(); ++l) pool[l] = l;
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  while (true) {
    Subspace span(code.field(), code.n());
    for (auto l : idx) {
      for (const auto& col : code.bucket(l)) span.insert(col);
    }
    if (span.rank() < code.n()) return false;
    std::size_t pos = size;
    while (pos > 0 && idx[pos - 1] == code.m() - size + (pos - 1)) --pos;
    if (pos == 0) return true;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
  }
}

}  // namespace bacforge

namespace bacforge {

RecoveryPlan realize_linear_plan(const CodeSpec& code, const BatchRequest& request,
                                 std::vector<std::vector<std::size_t>> sets,
                                 const std::vector<std::vector<std::size_t>>& cores) {
  if (sets.size() != request.size() || cores.size() != request.size()) {
    throw std::invalid_argument("one set and one core per request expected");
  }
  RecoveryPlan plan;
  for (std::size_t l = 0; l < code.m(); ++l) plan.responses.push_back(FVector::zero(code.bucket_size(l)));
  for (auto& part : sets) {
    std::sort(part.begin(), part.end());
    plan.combos.emplace_back(part.size(), 0);
  }
  plan.sets = std::move(sets);

  for (std::size_t j = 0; j < request.size(); ++j) {
    std::vector<std::size_t> core = cores[j];
    std::sort(core.begin(), core.end());
    std::vector<FVector> cols;
    for (auto l : core) cols.insert(cols.end(), code.bucket(l).begin(), code.bucket(l).end());
    const auto coeffs = span_solve(FVector::unit(code.n(), request.indices[j]), cols, code.field());
    if (!coeffs) throw std::logic_error("core of part " + std::to_string(j + 1) + " does not recover its symbol");
    std::size_t offset = 0;
    for (auto l : core) {
      const std::size_t len = code.bucket_size(l);
      plan.responses[l] = FVector(code.field(), std::vector<Residue>(coeffs->begin() + offset, coeffs->begin() + offset + len));
      offset += len;
      const auto& part = plan.sets[j];
      const auto pos = std::find(part.begin(), part.end(), l);
      if (pos == part.end()) throw std::invalid_argument("core bucket outside its part");
      plan.combos[j][static_cast<std::size_t>(pos - part.begin())] = 1;
    }
  }
  return plan;
}

}  // namespace bacforge
