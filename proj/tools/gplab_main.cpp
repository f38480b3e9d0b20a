// gplab command line: sample ensembles, evaluate polytope norms, run seeded
// experiments, print constant defaults, and merge reports into CSV.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gplab/experiment.hpp"

using namespace gplab;
using nlohmann::json;

namespace {

Vector parse_vector(const std::string& text) {
  Vector out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse vector entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty vector argument");
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw IoError("'" + path + "': " + ex.what());
  }
  return j;
}

void emit(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  detail::atomic_write(path, body);
}

int dispatch(int argc, char** argv) {
  CLI::App app{"gplab: a desk-scale laboratory for Gaussian polytope geometry"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "sample an ensemble and write it as JSON");
  int s_n = 0, s_N = 0;
  std::uint64_t s_seed = 0;
  std::string s_out;
  sample->add_option("--n", s_n, "ambient dimension")->required();
  sample->add_option("--N", s_N, "number of generators")->required();
  sample->add_option("--seed", s_seed, "64-bit seed")->required();
  sample->add_option("--out", s_out, "output path (default stdout)");

  // norm
  auto* norm = app.add_subcommand("norm", "evaluate the polytope norm of a vector");
  std::string n_ensemble, n_y, n_out;
  int n_n = 0, n_N = 0;
  std::uint64_t n_seed = 0;
  norm->add_option("--ensemble", n_ensemble, "ensemble JSON path (alternative to --n/--N/--seed)");
  norm->add_option("--n", n_n, "ambient dimension");
  norm->add_option("--N", n_N, "number of generators");
  norm->add_option("--seed", n_seed, "64-bit seed");
  norm->add_option("--y", n_y, "comma-separated vector")->required();
  norm->add_option("--out", n_out, "output path (default stdout)");

  // run
  auto* runcmd = app.add_subcommand("run", "run a seeded experiment from a JSON config");
  std::string r_experiment, r_config, r_out;
  long r_trials = -1;
  std::uint64_t r_seed = 0;
  bool r_seed_set = false;
  runcmd->add_option("experiment", r_experiment, "experiment name (overrides config)");
  runcmd->add_option("--config", r_config, "config JSON path")->required();
  runcmd->add_option("--trials", r_trials, "override trial count");
  runcmd
      ->add_option_function<std::uint64_t>(
          "--seed", [&](const std::uint64_t& v) { r_seed = v; r_seed_set = true; },
          "override ensemble seed")
      ->expected(1);
  runcmd->add_option("--out", r_out, "override report output path");

  // defaults
  auto* defaults = app.add_subcommand("defaults", "print every experiment constant default");

  // summarize
  auto* summarize = app.add_subcommand("summarize", "merge reports into a CSV table");
  std::vector<std::string> m_inputs;
  std::string m_out;
  summarize->add_option("reports", m_inputs, "report JSON paths")->required();
  summarize->add_option("--out", m_out, "CSV output path (default stdout)");

  app.parse(argc, argv);

  if (sample->parsed()) {
    const Ensemble e = sample_ensemble({.n = s_n, .N = s_N, .seed = s_seed});
    emit(s_out, to_json(e).dump(2) + "\n");
    return 0;
  }
  if (norm->parsed()) {
    Ensemble e;
    if (!n_ensemble.empty())
      e = ensemble_from_json(load_json(n_ensemble));
    else
      e = sample_ensemble({.n = n_n, .N = n_N, .seed = n_seed});
    const NormCertificate cert = minkowski_norm(e, parse_vector(n_y));
    json j{{"value", cert.value},
           {"beta", cert.beta.beta},
           {"l1", cert.beta.l1},
           {"residual", cert.residual},
           {"dual_gap", cert.dual_gap},
           {"dual_infeasibility", cert.dual_infeas}};
    emit(n_out, j.dump(2) + "\n");
    return 0;
  }
  if (runcmd->parsed()) {
    json cj = load_json(r_config);
    if (!r_experiment.empty()) cj["experiment"] = r_experiment;
    ExperimentConfig cfg = config_from_json(cj);
    if (r_trials >= 0) cfg.trials = r_trials;
    if (r_seed_set) cfg.ensemble.seed = r_seed;
    if (!r_out.empty()) cfg.output = r_out;
    const ExperimentReport rep = run(cfg);
    if (cfg.output.empty()) std::cout << rep.to_json().dump(2) << "\n";
    std::cerr << "ran " << rep.records.size() << " trial(s) of '"
              << experiment_name(cfg.experiment) << "' in " << rep.wall_clock_ms << " ms\n";
    return 0;
  }
  if (defaults->parsed()) {
    for (const auto& [exp, specs] : constant_registry()) {
      std::cout << exp << "\n";
      for (const auto& s : specs)
        std::printf("  %-22s %-12g %s\n", s.name.c_str(), s.value, s.doc.c_str());
    }
    return 0;
  }
  if (summarize->parsed()) {
    emit(m_out, report_summarize(m_inputs));
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::ParseError& e) {
    CLI::App app;
    return app.exit(e) ? 2 : 0;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const NumericsError& e) {
    std::cerr << "numerical contract violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
