#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <json.hpp>

#include "gplab/errors.hpp"
#include "gplab/matrix.hpp"
#include "gplab/rng.hpp"

namespace gplab {

struct EnsembleConfig {
  int n = 0;                 // ambient dimension
  int N = 0;                 // number of generators, N >= n
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> ratio_bounds;  // (K, K'), 1 < K <= K'

  void validate() const {
    if (n < 1) throw ConfigError("ensemble: ambient dimension n must be >= 1");
    if (N < n) throw ConfigError("ensemble: need N >= n generators");
    if (ratio_bounds) {
      const auto [k_lo, k_hi] = *ratio_bounds;
      if (!(1.0 < k_lo && k_lo <= k_hi))
        throw ConfigError("ensemble: ratio bounds must satisfy 1 < K <= K'");
      const double ratio = static_cast<double>(N) / n;
      if (ratio < k_lo || ratio > k_hi)
        throw ConfigError("ensemble: N/n outside the configured (K, K') window");
    }
  }
};

// n x N matrix A whose column j is the generator X_j. Immutable after
// construction; regenerating from config.seed reproduces A bit-for-bit.
struct Ensemble {
  Matrix A;
  EnsembleConfig config;

  int n() const { return config.n; }
  int N() const { return config.N; }
};

inline Ensemble sample_ensemble(const EnsembleConfig& config) {
  config.validate();
  Ensemble e;
  e.config = config;
  e.A = Matrix(config.n, config.N);
  // column-major counter layout: entry (i, j) is normal pair j*n + i
  for (int j = 0; j < config.N; ++j)
    for (int i = 0; i < config.n; ++i)
      e.A(i, j) = rng::counter_normal(config.seed,
                                      static_cast<std::uint64_t>(j) * config.n + i);
  // pairwise-distinct columns hold with probability 1; assert as sanity check
  for (int j = 0; j < config.N; ++j) {
    for (int l = j + 1; l < config.N; ++l) {
      bool same = true;
      for (int i = 0; i < config.n && same; ++i) same = e.A(i, j) == e.A(i, l);
      if (same) throw NumericsError("sample_ensemble: duplicate columns (degenerate draw)");
    }
  }
  return e;
}

// Deterministic substream derivation; distinct stream ids give statistically
// independent ensembles.
inline EnsembleConfig derive_stream(const EnsembleConfig& config, std::uint64_t stream_id) {
  EnsembleConfig out = config;
  out.seed = rng::derive_seed(config.seed, stream_id);
  return out;
}

inline nlohmann::json to_json(const Ensemble& e) {
  nlohmann::json j;
  j["n"] = e.config.n;
  j["N"] = e.config.N;
  j["seed"] = e.config.seed;
  j["data"] = e.A.a;  // row-major
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  Ensemble e;
  try {
    e.config.n = j.at("n").get<int>();
    e.config.N = j.at("N").get<int>();
    e.config.seed = j.at("seed").get<std::uint64_t>();
    const auto& data = j.at("data");
    e.A = Matrix(e.config.n, e.config.N);
    if (data.size() != e.A.a.size())
      throw ConfigError("ensemble json: data length does not match n*N");
    for (size_t i = 0; i < e.A.a.size(); ++i) e.A.a[i] = data.at(i).get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("ensemble json: ") + ex.what());
  }
  e.config.validate();
  return e;
}

}  // namespace gplab
