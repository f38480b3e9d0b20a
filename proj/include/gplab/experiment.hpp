#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gplab/cotype.hpp"
#include "gplab/embedding.hpp"
#include "gplab/ensemble.hpp"
#include "gplab/errors.hpp"
#include "gplab/geometry.hpp"
#include "gplab/grassmann.hpp"
#include "gplab/l1norm.hpp"
#include "gplab/rng.hpp"

// Batch experiment orchestration: per-experiment runners, seeded reproducibility,
// atomic JSON reports and the CSV summarizer.

namespace gplab {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  Events,
  Inradius,
  Incompressibility,
  Grassmann,
  ProjectionTails,
  Cotype,
  Spansofcomp,
  EmbedProbe,
  Cleaning,
};

inline const std::vector<std::pair<std::string, ExperimentKind>>& experiment_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names = {
      {"events", ExperimentKind::Events},
      {"inradius", ExperimentKind::Inradius},
      {"incompressibility", ExperimentKind::Incompressibility},
      {"grassmann", ExperimentKind::Grassmann},
      {"projection-tails", ExperimentKind::ProjectionTails},
      {"cotype", ExperimentKind::Cotype},
      {"spansofcomp", ExperimentKind::Spansofcomp},
      {"embed-probe", ExperimentKind::EmbedProbe},
      {"cleaning", ExperimentKind::Cleaning},
  };
  return names;
}

inline ExperimentKind experiment_from_name(const std::string& name) {
  for (const auto& [n, k] : experiment_names())
    if (n == name) return k;
  throw ConfigError("unknown experiment '" + name + "'");
}

inline std::string experiment_name(ExperimentKind k) {
  for (const auto& [n, kk] : experiment_names())
    if (kk == k) return n;
  return "?";
}

struct ConstantSpec {
  std::string name;
  double value;
  std::string doc;
};

// Every constant an experiment reads lives here with its default; nothing is
// hard-coded inside the runners.
inline const std::map<std::string, std::vector<ConstantSpec>>& constant_registry() {
  static const std::map<std::string, std::vector<ConstantSpec>> reg = {
      {"events",
       {{"c", 0.01, "sparse-subset fraction of n, admissible range (0, 1/100]"},
        {"subset_budget", 100000, "exhaustive subset cutoff / sample count"}}},
      {"inradius",
       {{"budget", 20000, "direction samples + descent evaluations for the upper bound"}}},
      {"incompressibility",
       {{"delta", 0.02, "sparsity fraction"},
        {"rho", 0.05, "compressibility radius"},
        {"probes", 10000, "random kernel probes per trial"},
        {"adversarial", 500, "support-targeted probes per trial"}}},
      {"grassmann",
       {{"d", 2, "subspace dimension"},
        {"epsilon", 0.25, "net radius"},
        {"sample_budget", 20000, "net construction samples"},
        {"entry_cap", 20000, "greedy net entry cap"},
        {"audit_batch", 0, "fresh audit samples (0 = auto)"},
        {"stop_radius", 0, "greedy stopping radius (0 = 0.85 epsilon)"},
        {"terms", 8, "decomposition length m"}}},
      {"projection-tails",
       {{"d", 2, "subspace dimension"},
        {"s", 10.0, "tail threshold scale"},
        {"C", 10.0, "tail threshold constant"}}},
      {"cotype",
       {{"k", 8, "family size"},
        {"q", 4.0, "cotype exponent"},
        {"family", 0, "0 = random vertices, 1 = random unit directions, 2 = standard basis"},
        {"oracle", 0, "0 = polytope norm, 1 = sup norm, 2 = euclidean"},
        {"mc_trials", 0, "0 = exact sign enumeration, else Monte Carlo trials"}}},
      {"spansofcomp",
       {{"k", 8, "family size"},
        {"c_floor", 1.0, "norm floor constant (floor = c_floor k^{-1/9})"},
        {"retry_cap", 200, "rejection-sampling retries per family"}}},
      {"embed-probe",
       {{"k", 4, "target l_inf dimension"},
        {"sigma_budget", 128, "sign vertices per certificate"},
        {"random_candidates", 8, "random-unit tuples"},
        {"vertex_candidates", 8, "vertex tuples"},
        {"truncated_candidates", 4, "truncated tuples"},
        {"descent_steps", 24, "coordinate-descent refinement steps"}}},
      {"cleaning",
       {{"L", 16, "family size"},
        {"alpha", 0.1, "spike exponent"},
        {"epsilon", 0.05, "decay slack"}}},
  };
  return reg;
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Events;
  EnsembleConfig ensemble;
  std::map<std::string, double> constants;  // effective = defaults + overrides
  long trials = 1;
  std::string output;  // empty -> in-memory only

  double constant(const std::string& name) const {
    auto it = constants.find(name);
    if (it == constants.end())
      throw ConfigError("experiment constant '" + name + "' has no value");
    return it->second;
  }
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.experiment = experiment_from_name(j.at("experiment").get<std::string>());
    const auto& ej = j.at("ensemble");
    cfg.ensemble.n = ej.at("n").get<int>();
    cfg.ensemble.N = ej.at("N").get<int>();
    cfg.ensemble.seed = ej.at("seed").get<std::uint64_t>();
    if (ej.contains("ratio_bounds")) {
      const auto& rb = ej.at("ratio_bounds");
      cfg.ensemble.ratio_bounds = std::make_pair(rb.at(0).get<double>(), rb.at(1).get<double>());
    }
    cfg.trials = j.value("trials", 1L);
    cfg.output = j.value("output", std::string());
    // defaults first, explicit values override; unknown names are rejected
    const auto& specs = constant_registry().at(experiment_name(cfg.experiment));
    for (const auto& s : specs) cfg.constants[s.name] = s.value;
    if (j.contains("constants")) {
      for (const auto& [key, val] : j.at("constants").items()) {
        if (!cfg.constants.count(key))
          throw ConfigError("constant '" + key + "' is not used by experiment '" +
                            experiment_name(cfg.experiment) + "'");
        cfg.constants[key] = val.get<double>();
      }
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("experiment config: ") + ex.what());
  }
  if (cfg.trials < 0) throw ConfigError("experiment config: trials must be >= 0");
  cfg.ensemble.validate();
  return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["ensemble"] = {{"n", cfg.ensemble.n}, {"N", cfg.ensemble.N}, {"seed", cfg.ensemble.seed}};
  if (cfg.ensemble.ratio_bounds)
    j["ensemble"]["ratio_bounds"] = {cfg.ensemble.ratio_bounds->first,
                                     cfg.ensemble.ratio_bounds->second};
  j["constants"] = cfg.constants;
  j["trials"] = cfg.trials;
  j["output"] = cfg.output;
  return j;
}

struct ExperimentReport {
  json config;
  std::vector<json> records;   // one flat object per trial, in trial order
  json aggregates;
  double wall_clock_ms = 0.0;
  std::string version = kVersion;

  json to_json() const {
    json j;
    j["config"] = config;
    j["records"] = records;
    j["aggregates"] = aggregates;
    j["wall_clock_ms"] = wall_clock_ms;
    j["version"] = version;
    return j;
  }
};

namespace detail {

inline json aggregate_records(const std::vector<json>& records) {
  json agg;
  if (records.empty()) {
    agg["empty"] = true;
    return agg;
  }
  agg["empty"] = false;
  agg["count"] = records.size();
  for (const auto& [key, val] : records.front().items()) {
    if (!val.is_number()) continue;
    std::vector<double> xs;
    xs.reserve(records.size());
    for (const auto& r : records) xs.push_back(r.at(key).get<double>());
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    const size_t m = sorted.size() / 2;
    const double median =
        sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    agg[key] = {{"mean", mean},
                {"median", median},
                {"min", sorted.front()},
                {"max", sorted.back()}};
  }
  return agg;
}

// write-then-rename so a killed run never leaves a partial report
inline void atomic_write(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << body;
    if (!out.flush()) throw IoError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

// deterministic fold: workers fill slots by trial index, aggregation reads in order
template <typename Fn>
std::vector<json> run_pool(long trials, Fn&& per_trial) {
  std::vector<json> records(trials);
  if (trials == 0) return records;
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GPLAB_WORKERS")) {
    const long v = std::atol(env);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  const unsigned workers = static_cast<unsigned>(std::min<long>(hw, trials));
  if (workers <= 1) {
    for (long t = 0; t < trials; ++t) records[t] = per_trial(t);
    return records;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const long t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          records[t] = per_trial(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

}  // namespace detail

// Random m_delta histograms that satisfy the cleaning spike hypothesis:
// one guaranteed qualifying bucket per vector plus arbitrary sub-threshold
// mass, all under the physical cap m(r) <= 4 n 2^{-r}.
inline std::vector<std::vector<long>> synthetic_spike_histograms(rng::Stream& st, int l_size,
                                                                 int n, double alpha) {
  const int r_hyp = static_cast<int>(std::floor(std::log2(std::sqrt(double(l_size))) + 1e-12));
  const int r_top = r_hyp + 4 + st.below(4);
  std::vector<std::vector<long>> hists;
  for (int i = 0; i < l_size; ++i) {
    std::vector<long> h(r_top + 1, 0);
    const int rs = st.below(r_hyp + 1);
    const double thr = std::pow(double(l_size), alpha) * std::ldexp(1.0, -2 * rs) * n;
    const long cap = static_cast<long>(std::floor(4.0 * n * std::ldexp(1.0, -rs)));
    const long spike = std::min<long>(cap, static_cast<long>(std::ceil(thr)) + 1 +
                                               st.below(std::max(1, n / 8)));
    if (spike <= static_cast<long>(thr))
      throw NumericsError("synthetic_spike_histograms: cap below hypothesis threshold");
    h[rs] = spike;
    for (int r = 0; r <= r_top; ++r) {
      if (r == rs) continue;
      const long rcap = static_cast<long>(std::floor(4.0 * n * std::ldexp(1.0, -r)));
      if (rcap > 0 && st.uniform() < 0.7) h[r] = st.below(static_cast<int>(rcap) + 1);
    }
    hists.push_back(std::move(h));
  }
  return hists;
}

inline ExperimentReport run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = config_to_json(cfg);

  switch (cfg.experiment) {
    case ExperimentKind::Events: {
      const double c = cfg.constant("c");
      const long budget = static_cast<long>(cfg.constant("subset_budget"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        const EventReport ev = event_sparse_singular(e, c, budget);
        json r{{"trial", t}, {"seed", ec.seed}, {"all_hold", ev.all_hold() ? 1 : 0}};
        for (const auto& cond : ev.conditions) {
          r["margin_" + cond.name] = cond.margin;
          r["holds_" + cond.name] = cond.holds ? 1 : 0;
        }
        r["conditions"] = event_report_records(ec.seed, ev);
        return r;
      });
      break;
    }
    case ExperimentKind::Inradius: {
      const long budget = static_cast<long>(cfg.constant("budget"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        const double lo = inradius_lower(e);
        const double hi = inradius_upper(e, budget);
        return json{{"trial", t}, {"seed", ec.seed}, {"lower", lo}, {"upper", hi},
                    {"sandwich_ok", hi >= lo - 1e-9 ? 1 : 0}};
      });
      break;
    }
    case ExperimentKind::Incompressibility: {
      const double delta = cfg.constant("delta");
      const double rho = cfg.constant("rho");
      const long probes = static_cast<long>(cfg.constant("probes"));
      const long adv = static_cast<long>(cfg.constant("adversarial"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        const KernelScanReport scan =
            kernel_incompressibility_scan(e, delta, rho, probes, adv);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"min_distance", scan.min_distance},
                    {"violations", scan.violations},
                    {"random_min", scan.random_min},
                    {"adversarial_min", scan.adversarial_min}};
      });
      break;
    }
    case ExperimentKind::Grassmann: {
      const int d = static_cast<int>(cfg.constant("d"));
      const double eps = cfg.constant("epsilon");
      const long budget = static_cast<long>(cfg.constant("sample_budget"));
      const int terms = static_cast<int>(cfg.constant("terms"));
      NetOptions opts;
      opts.seed = cfg.ensemble.seed;
      opts.entry_cap = static_cast<int>(cfg.constant("entry_cap"));
      opts.audit_batch = static_cast<long>(cfg.constant("audit_batch"));
      opts.stop_radius = cfg.constant("stop_radius");
      const GrassmannNet net = build_net(cfg.ensemble.n, d, eps, budget, opts);
      rep.aggregates["net_entries"] = net.entries.size();
      rep.aggregates["coverage_audit"] = net.coverage_audit;
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        rng::Stream st(rng::derive_seed(cfg.ensemble.seed, 1000 + t));
        const Subspace f = random_subspace(st, cfg.ensemble.n, d);
        const auto steps = decompose_projection(net, f, terms);
        double min_slack = std::numeric_limits<double>::infinity();
        for (const auto& s : steps)
          min_slack = std::min(min_slack, s.norm_bound - spectral_norm(s.d_op));
        // residual after the full expansion
        Matrix acc(net.n, net.n);
        for (const auto& s : steps)
          acc = acc + matmul(s.d_op, projector(net.entries[s.index]));
        const double res = spectral_norm(projector(f) - acc);
        const double res_bound = 2.0 * std::pow(eps, terms) / (1.0 - eps);
        return json{{"trial", t},
                    {"seed", rng::derive_seed(cfg.ensemble.seed, 1000 + t)},
                    {"min_step_slack", min_slack},
                    {"residual", res},
                    {"residual_bound", res_bound},
                    {"ok", res <= res_bound + 1e-8 && min_slack >= -1e-9 ? 1 : 0}};
      });
      break;
    }
    case ExperimentKind::ProjectionTails: {
      const int d = static_cast<int>(cfg.constant("d"));
      const double s = cfg.constant("s");
      const double c = cfg.constant("C");
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        rng::Stream st(rng::derive_seed(ec.seed, 2000));
        const Subspace f = random_subspace(st, e.n(), d);
        const TailCount tc = projection_tail_counts(e, f, s, c);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"count", tc.count},
                    {"bound", tc.bound},
                    {"ok", tc.count <= tc.bound ? 1 : 0}};
      });
      break;
    }
    case ExperimentKind::Cotype: {
      const int k = static_cast<int>(cfg.constant("k"));
      const double q = cfg.constant("q");
      const int family = static_cast<int>(cfg.constant("family"));
      const long mc = static_cast<long>(cfg.constant("mc_trials"));
      const int oracle_kind = static_cast<int>(cfg.constant("oracle"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        NormOracle oracle;
        std::shared_ptr<const PolytopeNorm> solver;
        if (oracle_kind == 0) {
          solver = std::make_shared<const PolytopeNorm>(e);
          oracle = NormOracle{"polytope", e.n(),
                              [solver](const Vector& x) { return solver->solve(x).value; }};
        } else if (oracle_kind == 1) {
          oracle = sup_oracle(e.n());
        } else if (oracle_kind == 2) {
          oracle = euclidean_oracle(e.n());
        } else {
          throw ConfigError("cotype experiment: oracle must be 0, 1 or 2");
        }
        rng::Stream st(rng::derive_seed(ec.seed, 3000));
        std::vector<Vector> ys;
        if (family == 0) {
          std::vector<int> idx(e.N());
          std::iota(idx.begin(), idx.end(), 0);
          for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + st.below(e.N() - i)]);
          for (int i = 0; i < k; ++i) ys.push_back(e.A.col(idx[i]));
        } else if (family == 1) {
          for (int i = 0; i < k; ++i) {
            Vector y(e.n());
            for (auto& v : y) v = st.normal();
            const double nn = norm2(y);
            for (auto& v : y) v /= nn;
            ys.push_back(y);
          }
        } else if (family == 2) {
          if (k > e.n()) throw ConfigError("cotype experiment: basis family needs k <= n");
          for (int i = 0; i < k; ++i) {
            Vector y(e.n(), 0.0);
            y[i] = 1.0;
            ys.push_back(y);
          }
        } else {
          throw ConfigError("cotype experiment: family must be 0, 1 or 2");
        }
        const CotypeEstimate est =
            mc > 0 ? cotype_constant(oracle, ys, q, SignMode::MonteCarlo, mc, ec.seed)
                   : cotype_constant(oracle, ys, q, SignMode::Exact);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"constant", est.constant},
                    {"stderr", est.stderr_},
                    {"trials_used", est.trials}};
      });
      break;
    }
    case ExperimentKind::Spansofcomp: {
      const int k = static_cast<int>(cfg.constant("k"));
      const double c_floor = cfg.constant("c_floor");
      const long retry = static_cast<long>(cfg.constant("retry_cap"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        const SpansofcompReport pr = spansofcomp_probe(e, k, c_floor, 1, retry);
        const auto& fam = pr.families.front();
        double min_norm = std::numeric_limits<double>::infinity();
        for (double v : fam.norms) min_norm = std::min(min_norm, v);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"mean_sign_norm", fam.mean_sign_norm},
                    {"min_norm", min_norm},
                    {"floor", pr.floor},
                    {"threshold", pr.threshold},
                    {"above_threshold", fam.mean_sign_norm >= pr.threshold ? 1 : 0}};
      });
      break;
    }
    case ExperimentKind::EmbedProbe: {
      const int k = static_cast<int>(cfg.constant("k"));
      ProbeBudget budget;
      budget.sigma_budget = static_cast<long>(cfg.constant("sigma_budget"));
      budget.random_candidates = static_cast<int>(cfg.constant("random_candidates"));
      budget.vertex_candidates = static_cast<int>(cfg.constant("vertex_candidates"));
      budget.truncated_candidates = static_cast<int>(cfg.constant("truncated_candidates"));
      budget.descent_steps = static_cast<int>(cfg.constant("descent_steps"));
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        const Ensemble e = sample_ensemble(ec);
        const ProbeReport pr = distortion_growth_probe(e, k, default_probe_strategies(), budget);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"k", k},
                    {"best_bound", pr.best_bound},
                    {"best_strategy", pr.best.strategy},
                    {"probe", to_json(pr)}};
      });
      break;
    }
    case ExperimentKind::Cleaning: {
      const int lsz = static_cast<int>(cfg.constant("L"));
      const double alpha = cfg.constant("alpha");
      const double eps = cfg.constant("epsilon");
      const int n = cfg.ensemble.n;
      rep.records = detail::run_pool(cfg.trials, [&](long t) {
        const EnsembleConfig ec = derive_stream(cfg.ensemble, t);
        rng::Stream st(ec.seed);
        const auto hists = synthetic_spike_histograms(st, lsz, n, alpha);
        const CleaningResult res = cleaning_preprocess(hists, n, alpha, eps);
        return json{{"trial", t},
                    {"seed", ec.seed},
                    {"selected", res.selected.size()},
                    {"r", res.r},
                    {"p", res.p},
                    {"ok", 1}};
      });
      break;
    }
  }

  if (!rep.aggregates.is_object()) rep.aggregates = json::object();
  const json agg = detail::aggregate_records(rep.records);
  for (const auto& [k2, v] : agg.items()) rep.aggregates[k2] = v;
  rep.wall_clock_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  if (!cfg.output.empty()) detail::atomic_write(cfg.output, rep.to_json().dump(2) + "\n");
  return rep;
}


// Deterministic merge of reports sharing one experiment into a CSV table,
// keyed by (seed, trial); duplicate keys are an error.
inline std::string report_summarize(const std::vector<std::string>& paths) {
  if (paths.empty()) throw PreconditionError("report_summarize: no inputs");
  std::string experiment;
  struct Row {
    std::uint64_t seed;
    long trial;
    json record;
  };
  std::vector<Row> rows;
  std::vector<std::string> columns;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report '" + path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& ex) {
      throw IoError("report '" + path + "': " + ex.what());
    }
    const std::string exp = j.at("config").at("experiment").get<std::string>();
    if (experiment.empty())
      experiment = exp;
    else if (experiment != exp)
      throw PreconditionError("report_summarize: mixed experiment types ('" + experiment +
                              "' vs '" + exp + "')");
    for (const auto& rec : j.at("records")) {
      if (columns.empty())
        for (const auto& [key, val] : rec.items())
          if (val.is_primitive()) columns.push_back(key);  // nested detail stays in JSON
      rows.push_back({rec.at("seed").get<std::uint64_t>(), rec.at("trial").get<long>(), rec});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.seed != b.seed ? a.seed < b.seed : a.trial < b.trial;
  });
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].seed == rows[i - 1].seed && rows[i].trial == rows[i - 1].trial)
      throw PreconditionError("report_summarize: duplicate (seed, trial) key");

  std::ostringstream out;
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ",";
      const json& v = row.record.at(columns[c]);
      if (v.is_string())
        out << v.get<std::string>();
      else
        out << v.dump();
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace gplab
