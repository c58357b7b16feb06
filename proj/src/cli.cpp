#include "bacforge/cli.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "bacforge/bounds.hpp"
#include "bacforge/code_io.hpp"
#include "bacforge/constructions.hpp"
#include "bacforge/random_affine.hpp"
#include "bacforge/simulator.hpp"
#include "bacforge/verifier.hpp"

namespace bacforge::cli {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::int64_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("bad ") + what + " list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

BatchRequest parse_request(const std::string& text, std::size_t n) {
  std::vector<std::size_t> idx;
  for (auto v : parse_list(text, "request")) {
    if (v < 1 || static_cast<std::size_t>(v) > n) {
      throw UsageError("request index " + std::to_string(v) + " outside [1, " + std::to_string(n) + "]");
    }
    idx.push_back(static_cast<std::size_t>(v - 1));
  }
  return BatchRequest::make(std::move(idx), n);
}

ResponseModel parse_model(const std::string& mode) {
  if (mode == "linear") return ResponseModel::Linear;
  if (mode == "projection") return ResponseModel::ProjectionOnly;
  throw UsageError("mode must be linear or projection");
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) ^ rd();
}

void emit_code(const CodeDocument& doc, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << serialize_code(doc);
  } else {
    save_code(doc, out_path);
  }
}

Json request_json(const BatchRequest& r) { return request_to_json(r); }

std::vector<BatchRequest> all_multisets(std::size_t n, std::size_t k) {
  std::vector<BatchRequest> out;
  BatchRequest r{std::vector<std::size_t>(k, 0)};
  do {
    out.push_back(r);
  } while (next_multiset(r.indices, n));
  return out;
}

Json sim_report_json(const SimReport& r) {
  Json j;
  j["request"] = request_json(r.request);
  j["model"] = r.model == ResponseModel::Linear ? "linear" : "projection";
  j["recovered"] = r.recovered;
  j["responses"] = r.node_responses;
  j["loads"] = r.loads;
  j["symbols_read"] = r.symbols_read;
  j["max_load"] = r.max_load;
  j["mean_load"] = r.mean_load;
  return j;
}

Json load_stats_json(const LoadStats& s) {
  Json j;
  j["batches"] = s.batches;
  j["responses"] = s.responses;
  j["max_load"] = s.max_load;
  j["mean_load"] = s.mean_load;
  j["max_symbols_read"] = s.max_symbols_read;
  Json hist = Json::object();
  for (const auto& [reads, count] : s.symbols_read_histogram) hist[std::to_string(reads)] = count;
  j["symbols_read_histogram"] = std::move(hist);
  return j;
}

Json bound_json(const BoundReport& r) {
  Json j;
  j["n"] = r.n;
  j["k"] = r.k;
  j["m"] = r.m;
  j["lb_num"] = boost::multiprecision::numerator(r.lower.value).str();
  j["lb_den"] = boost::multiprecision::denominator(r.lower.value).str();
  j["lb_ceil"] = r.lower_ceil.convert_to<std::uint64_t>();
  j["lb_source"] = r.lower.source;
  if (r.upper) {
    j["ub"] = r.upper->length;
    j["ub_source"] = r.upper->family;
    j["ub_pir_only"] = r.upper->pir_only;
  } else {
    j["ub"] = nullptr;
    j["ub_source"] = nullptr;
    j["ub_pir_only"] = nullptr;
  }
  j["optimal"] = r.optimal;
  return j;
}

Json good_vector_json(const GoodVector& v) {
  Json j;
  j["t"] = v.t;
  j["v"] = v.entries;
  Json last = Json::object();
  for (std::size_t x = 1; x <= v.t; ++x) last[std::to_string(x)] = v.last_occurrence[x];
  j["last_occurrence"] = std::move(last);
  const auto th = max_batch_k(v.t);
  j["max_batch_k"] = th.k;
  j["closed_form_k"] = th.closed_form;
  j["code_n"] = good_vector_code_length(v);
  return j;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Construct, verify, bound and simulate batch array codes", "bacforge"};
  app.require_subcommand(1);

  // construct
  auto* construct = app.add_subcommand("construct", "Build a code from one of the known families");
  std::string family, out_path, v_text;
  std::size_t n = 0, k = 0, m = 0, t = 0, s = 0;
  std::uint32_t q = 0, field_p = 2;
  double p1 = 0, p2 = 0;
  std::uint64_t seed = 0;
  construct->add_option("family", family, "replication|single|parity|cyclic|uniform|goodvec|affine")
      ->required()
      ->check(CLI::IsMember({"replication", "single", "parity", "cyclic", "uniform", "goodvec", "affine"}));
  auto* o_n = construct->add_option("--n", n);
  auto* o_k = construct->add_option("--k", k);
  auto* o_m = construct->add_option("--m", m);
  auto* o_t = construct->add_option("--t", t);
  auto* o_v = construct->add_option("--v", v_text, "good vector, e.g. 1,1,2,0,2");
  auto* o_q = construct->add_option("--q", q);
  auto* o_s = construct->add_option("--s", s);
  auto* o_p1 = construct->add_option("--p1", p1);
  auto* o_p2 = construct->add_option("--p2", p2);
  auto* o_seed = construct->add_option("--seed", seed);
  construct->add_option("--field", field_p, "prime modulus")->default_val(2);
  construct->add_option("--out", out_path);

  // verify
  auto* verify = app.add_subcommand("verify", "Exhaustively check the batch (or PIR) property");
  std::string code_path, mode = "linear";
  std::size_t vk = 0;
  unsigned jobs = 0;
  bool pir_only = false;
  verify->add_option("code", code_path)->required();
  verify->add_option("--k", vk)->required();
  verify->add_option("--mode", mode)->check(CLI::IsMember({"linear", "projection"}));
  verify->add_flag("--pir-only", pir_only);
  verify->add_option("--jobs", jobs, "worker threads, 0 = all cores");

  // bounds [table]
  auto* bounds = app.add_subcommand("bounds", "Lower and upper bounds on the code length");
  std::uint64_t bn = 0, bk = 0, bm = 0;
  auto* o_bn = bounds->add_option("--n", bn);
  auto* o_bk = bounds->add_option("--k", bk);
  auto* o_bm = bounds->add_option("--m", bm);
  auto* table = bounds->add_subcommand("table", "Bound atlas over parameter ranges");
  std::string n_range, k_range, m_rule = "all", csv_path;
  table->add_option("--n-range", n_range)->required();
  table->add_option("--k-range", k_range)->required();
  table->add_option("--m-rule", m_rule)->check(CLI::IsMember({"k+1", "k+2", "all"}));
  table->add_option("--csv", csv_path);

  // goodvec
  auto* goodvec = app.add_subcommand("goodvec", "Good vectors: explicit length 2t+1, or enumerate");
  std::size_t gt = 0, glen = 0;
  bool enumerate = false;
  goodvec->add_option("--t", gt)->required();
  goodvec->add_flag("--enumerate", enumerate);
  auto* o_len = goodvec->add_option("--len", glen);

  // compose
  auto* compose = app.add_subcommand("compose", "Gadget composition of codes");
  std::string how;
  std::vector<std::string> inputs;
  std::size_t count = 0;
  std::string compose_out;
  compose->add_option("how", how)->required()->check(CLI::IsMember({"parallel", "concat", "repeat"}));
  compose->add_option("inputs", inputs)->required();
  auto* o_count = compose->add_option("--count", count);
  compose->add_option("--out", compose_out);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Serve requests on simulated nodes");
  std::string sim_code, data_text, request_text, sim_mode = "linear", planner_kind = "exhaustive", compare_path,
                                                    sweep_csv_path;
  std::size_t sweep_k = 0;
  simulate->add_option("code", sim_code)->required();
  simulate->add_option("--data", data_text);
  simulate->add_option("--request", request_text);
  simulate->add_option("--mode", sim_mode)->check(CLI::IsMember({"linear", "projection"}));
  simulate->add_option("--planner", planner_kind)->check(CLI::IsMember({"exhaustive", "certified"}));
  auto* o_sweep = simulate->add_option("--sweep", sweep_k, "serve every multiset of this size");
  simulate->add_option("--csv", sweep_csv_path, "sweep rows request,node,load,symbols_read");
  simulate->add_option("--compare", compare_path, "projection-only code to compare against");

  // random-trials
  auto* trials_cmd = app.add_subcommand("random-trials", "Sampled greedy recovery on an affine code");
  std::string trial_code;
  std::size_t tk = 0, trials = 0;
  std::uint64_t trial_seed = 0;
  bool strict = false;
  unsigned trial_jobs = 1;
  trials_cmd->add_option("code", trial_code)->required();
  trials_cmd->add_option("--k", tk)->required();
  trials_cmd->add_option("--trials", trials)->required();
  auto* o_tseed = trials_cmd->add_option("--seed", trial_seed);
  trials_cmd->add_flag("--strict-appendix", strict);
  trials_cmd->add_option("--jobs", trial_jobs);

  std::vector<const char*> argv{"bacforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (construct->parsed()) {
      auto need = [](CLI::Option* o, const char* name) {
        if (o->count() == 0) throw UsageError(std::string("construct needs --") + name);
      };
      const PrimeField field(field_p);
      CodeDocument doc{CodeSpec(field, 1, {Bucket{FVector::unit(1, 0)}}), Json()};
      Json prov;
      prov["family"] = family;
      if (family == "replication") {
        need(o_n, "n"), need(o_k, "k");
        doc.code = trivial_replication(n, k, field);
        prov["n"] = n, prov["k"] = k;
      } else if (family == "single") {
        need(o_n, "n"), need(o_m, "m");
        doc.code = single_request_code(n, m, field);
        prov["n"] = n, prov["m"] = m;
      } else if (family == "parity") {
        need(o_m, "m");
        doc.code = parity_code_k2(m, field);
        prov["m"] = m;
      } else if (family == "cyclic") {
        need(o_n, "n"), need(o_k, "k"), need(o_m, "m");
        doc.code = cyclic_shift_code(CyclicParams::make(n, k, m), field);
        prov["n"] = n, prov["k"] = k, prov["m"] = m;
      } else if (family == "uniform") {
        need(o_n, "n"), need(o_k, "k");
        doc.code = uniform_code(n, k, field);
        prov["n"] = n, prov["k"] = k;
      } else if (family == "goodvec") {
        if (o_v->count() == 0 && o_t->count() == 0) throw UsageError("construct goodvec needs --v or --t");
        GoodVector gv;
        if (o_v->count()) {
          std::vector<std::size_t> entries;
          for (auto e : parse_list(v_text, "vector")) {
            if (e < 0) throw UsageError("good vector entries must be non-negative");
            entries.push_back(static_cast<std::size_t>(e));
          }
          gv = GoodVector::make(std::move(entries));
        } else {
          gv = good_vector_2t1(t);
        }
        doc.code = good_vector_code(gv, field);
        prov["v"] = gv.entries;
      } else {  // affine
        need(o_q, "q"), need(o_k, "k");
        if (o_s->count() == 0) s = 1;
        const auto defaults = default_params(q, k, s);
        if (o_p1->count() == 0) p1 = defaults.p1;
        if (o_p2->count() == 0) p2 = defaults.p2;
        if (o_seed->count() == 0) {
          seed = fresh_seed();
          err << "seed: " << seed << '\n';
        }
        if (defaults.clamped && (o_p1->count() == 0 || o_p2->count() == 0)) {
          err << "note: default probabilities clamped to 1; outside the asymptotic regime\n";
        }
        auto apc = random_bac(q, k, s, p1, p2, seed, field);
        doc.code = apc.code;
        prov["q"] = q, prov["k"] = k, prov["s"] = s, prov["p1"] = p1, prov["p2"] = p2, prov["seed"] = seed;
        prov["rng"] = apc.rng;
      }
      doc.provenance = std::move(prov);
      emit_code(doc, out_path, out);
      err << family << ": n=" << doc.code.n() << " N=" << total_length(doc.code) << " m=" << doc.code.m() << '\n';
      return kPass;
    }

    if (verify->parsed()) {
      const auto doc = load_code(code_path);
      const auto model = parse_model(mode);
      const auto report = pir_only ? verify_pir(doc.code, vk, model, jobs) : verify_bac(doc.code, vk, model, jobs);
      out << report_to_json(report).dump() << '\n';
      err << (report.passed() ? "pass" : "fail") << ": " << report.total_requests << " requests, "
          << report.failures.size() << " failures, " << report.elapsed.count() << " s\n";
      return report.passed() ? kPass : kFail;
    }

    if (bounds->parsed()) {
      if (table->parsed()) {
        const auto rows = bound_table(parse_range(n_range), parse_range(k_range), parse_m_rule(m_rule));
        Json arr = Json::array();
        for (const auto& r : rows) arr.push_back(bound_json(r));
        out << arr.dump() << '\n';
        if (!csv_path.empty()) {
          std::ofstream csv(csv_path);
          if (!csv) throw UsageError("cannot write " + csv_path);
          csv << bound_table_csv(rows);
        }
        err << rows.size() << " rows\n";
        return kPass;
      }
      if (o_bn->count() == 0 || o_bk->count() == 0 || o_bm->count() == 0) {
        throw UsageError("bounds needs --n, --k and --m (or the table subcommand)");
      }
      const auto r = bound_report(bn, bk, bm);
      auto j = bound_json(r);
      j["batch_code_bound_info"] = ceil(projection_batch_bound(bn, bk)).convert_to<std::uint64_t>();
      out << j.dump() << '\n';
      err << "lb " << r.lower_ceil << " (" << r.lower.source << "), ub "
          << (r.upper ? std::to_string(r.upper->length) + " (" + r.upper->family + ")" : std::string("none"))
          << (r.optimal ? ", optimal" : "") << '\n';
      return kPass;
    }

    if (goodvec->parsed()) {
      if (enumerate) {
        if (o_len->count() == 0) glen = 2 * gt;
        const auto all = enumerate_good_vectors(gt, glen);
        out << Json(all).dump() << '\n';
        err << all.size() << " good vectors of length " << glen << " for t=" << gt << '\n';
      } else {
        out << good_vector_json(good_vector_2t1(gt)).dump() << '\n';
      }
      return kPass;
    }

    if (compose->parsed()) {
      CodeDocument result{CodeSpec(PrimeField(2), 1, {Bucket{}}), Json()};
      Json prov;
      prov["family"] = "compose-" + how;
      if (how == "repeat") {
        if (inputs.size() != 1 || o_count->count() == 0) throw UsageError("compose repeat takes one code and --count");
        result.code = compose_repeat(load_code(inputs[0]).code, count);
        prov["count"] = count;
      } else {
        if (inputs.size() != 2) throw UsageError("compose " + how + " takes two codes");
        const auto a = load_code(inputs[0]).code, b = load_code(inputs[1]).code;
        result.code = how == "parallel" ? compose_parallel(a, b) : compose_concat(a, b);
      }
      result.provenance = std::move(prov);
      emit_code(result, compose_out, out);
      err << "composed: n=" << result.code.n() << " N=" << total_length(result.code) << " m=" << result.code.m() << '\n';
      return kPass;
    }

    if (simulate->parsed()) {
      const auto doc = load_code(sim_code);
      const auto& code = doc.code;
      if (!compare_path.empty()) {
        const auto other = load_code(compare_path);
        std::vector<BatchRequest> requests;
        if (o_sweep->count()) {
          requests = all_multisets(code.n(), sweep_k);
        } else if (!request_text.empty()) {
          requests.push_back(parse_request(request_text, code.n()));
        } else {
          throw UsageError("simulate --compare needs --sweep or --request");
        }
        const auto cmp = compare_models(code, other.code, requests);
        Json j;
        j["linear_length"] = cmp.linear_length;
        j["projection_length"] = cmp.projection_length;
        Json rows = Json::array();
        for (const auto& r : cmp.rows) {
          Json row;
          row["request"] = request_json(r.request);
          row["linear_max_read"] = r.linear_max_read;
          row["projection_max_read"] = r.projection_max_read;
          row["linear_total_read"] = r.linear_total_read;
          row["projection_total_read"] = r.projection_total_read;
          rows.push_back(std::move(row));
        }
        j["rows"] = std::move(rows);
        j["linear"] = load_stats_json(cmp.linear);
        j["projection"] = load_stats_json(cmp.projection);
        out << j.dump() << '\n';
        err << "N " << cmp.linear_length << " (linear) vs " << cmp.projection_length << " (projection)\n";
        return kPass;
      }

      if (data_text.empty()) throw UsageError("simulate needs --data");
      const FVector data(code.field(), parse_list(data_text, "data"));
      if (data.size() != code.n()) throw UsageError("--data must have n = " + std::to_string(code.n()) + " entries");
      const auto model = parse_model(sim_mode);
      Planner planner;
      if (planner_kind == "certified") {
        if (model != ResponseModel::Linear) throw UsageError("certified planners use the linear model");
        planner = certified_planner(doc);
      } else {
        planner = exhaustive_planner(code, model);
      }
      Cluster cluster(code, data);
      if (o_sweep->count()) {
        std::vector<SimReport> reports;
        for (const auto& r : all_multisets(code.n(), sweep_k)) reports.push_back(cluster.serve(r, planner, model));
        out << load_stats_json(load_stats(reports)).dump() << '\n';
        if (!sweep_csv_path.empty()) {
          std::ofstream csv(sweep_csv_path);
          if (!csv) throw UsageError("cannot write " + sweep_csv_path);
          csv << sweep_csv(reports);
        }
        err << reports.size() << " batches served\n";
        return kPass;
      }
      if (request_text.empty()) throw UsageError("simulate needs --request or --sweep");
      const auto report = cluster.serve(parse_request(request_text, code.n()), planner, model);
      out << sim_report_json(report).dump() << '\n';
      return kPass;
    }

    if (trials_cmd->parsed()) {
      const auto doc = load_code(trial_code);
      const auto apc = rebuild_affine(doc);
      if (o_tseed->count() == 0) {
        trial_seed = fresh_seed();
        err << "seed: " << trial_seed << '\n';
      }
      const auto report = trial_verify(apc, tk, trials, trial_seed, strict, trial_jobs);
      Json j;
      j["trials"] = report.trials;
      j["successes"] = report.successes;
      j["rate"] = report.rate();
      j["seed"] = trial_seed;
      Json failures = Json::array();
      for (const auto& f : report.failures) failures.push_back(request_json(f));
      j["failures"] = std::move(failures);
      out << j.dump() << '\n';
      err << report.successes << "/" << report.trials << " requests served\n";
      return report.failures.empty() ? kPass : kFail;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << "error: no subcommand\n";
  return kUsage;
}

}  // namespace bacforge::cli
