#pragma once

// Wind-driven non-homogeneous Poisson line failures: hourly rates, cumulative
// intensities, failure probabilities and scenario sampling/selection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/network_model.hpp"
#include "stormdn/rng.hpp"
#include "stormdn/wind_field.hpp"

namespace stormdn {

struct NhppParams {
  double alpha = 4175.6;
  double v_crit = 20.6;         // m/s
  double lambda_norm = 3.5e-5;  // failures / hr / km

  void validate() const {
    std::vector<std::string> bad;
    if (!(alpha > 0)) bad.push_back("alpha must be > 0");
    if (!(v_crit > 0)) bad.push_back("v_crit must be > 0");
    if (!(lambda_norm > 0)) bad.push_back("lambda_norm must be > 0");
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

struct LineIntensity {
  int edge = 0;
  double lambda = 0.0;  // cumulative intensity over the storm window
  double p = 0.0;       // failure probability
};

using ScenarioBits = std::vector<std::uint8_t>;

struct FailureScenario {
  ScenarioBits failed;  // 1 = failed
  double prob = 0.0;

  int num_failed() const {
    int n = 0;
    for (auto b : failed) n += b ? 1 : 0;
    return n;
  }
};

// Failure rate per hour and km at wind speed v.
inline double poisson_rate(double v, const NhppParams& params) {
  if (v < params.v_crit) return params.lambda_norm;
  const double ratio = v / params.v_crit;
  return (1.0 + params.alpha * (ratio * ratio - 1.0)) * params.lambda_norm;
}

// Hourly sum of rates over the storm window (per km).
inline double cell_cumulative_intensity(std::span<const double> hourly_rates) {
  if (hourly_rates.empty()) throw InvalidInput("cumulative intensity needs at least one hourly rate");
  double sum = 0.0;
  for (double r : hourly_rates) {
    if (r < 0) throw InvalidInput("negative hourly failure rate");
    sum += r * kTimeStepHours;
  }
  return sum;
}

inline double line_cumulative_intensity(const std::map<int, double>& lengths,
                                        const std::map<int, double>& cell_intensity) {
  double lambda = 0.0;
  for (const auto& [cell, len] : lengths) {
    if (len < 0) throw InvalidInput("negative line length in cell " + std::to_string(cell));
    auto it = cell_intensity.find(cell);
    if (it == cell_intensity.end()) {
      throw MissingData("no cumulative intensity for grid cell " + std::to_string(cell));
    }
    lambda += len * it->second;
  }
  return lambda;
}

inline double line_failure_probability(double lambda) {
  if (lambda < 0) throw InvalidInput("cumulative intensity must be >= 0");
  return -std::expm1(-lambda);
}

inline double scenario_probability(std::span<const std::uint8_t> s, std::span<const double> p) {
  if (s.size() != p.size()) {
    throw InvalidInput("scenario has " + std::to_string(s.size()) + " edges but " +
                       std::to_string(p.size()) + " probabilities were given");
  }
  double prob = 1.0;
  for (std::size_t e = 0; e < s.size(); ++e) prob *= s[e] ? p[e] : (1.0 - p[e]);
  return prob;
}

inline FailureScenario sample_scenario(std::span<const double> p, Rng& rng) {
  FailureScenario out;
  out.failed.resize(p.size());
  for (std::size_t e = 0; e < p.size(); ++e) out.failed[e] = rng.bernoulli(p[e]) ? 1 : 0;
  out.prob = scenario_probability(out.failed, p);
  return out;
}

struct SelectionOptions {
  int n_samples = 1000;
  int top = 100;
  int subset_size = 3;
};

// Sample, collapse duplicates, rank by probability, keep the most probable
// `top`, then draw `subset_size` distinct scenarios uniformly from them.
inline std::vector<FailureScenario> select_scenarios(std::span<const double> p, Rng& rng,
                                                     const SelectionOptions& opt = {}) {
  if (opt.subset_size < 1 || opt.subset_size > opt.top || opt.top > opt.n_samples) {
    throw InvalidInput("need 1 <= subset_size <= top <= n_samples");
  }
  std::set<ScenarioBits> seen;
  std::vector<FailureScenario> distinct;
  for (int i = 0; i < opt.n_samples; ++i) {
    FailureScenario s = sample_scenario(p, rng);
    if (seen.insert(s.failed).second) distinct.push_back(std::move(s));
  }
  std::sort(distinct.begin(), distinct.end(), [](const FailureScenario& a, const FailureScenario& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.failed < b.failed;
  });
  if (static_cast<int>(distinct.size()) > opt.top) distinct.resize(opt.top);
  if (static_cast<int>(distinct.size()) < opt.subset_size) {
    throw InvalidInput("only " + std::to_string(distinct.size()) +
                       " distinct scenarios were sampled but subset_size is " +
                       std::to_string(opt.subset_size) + " (short by " +
                       std::to_string(opt.subset_size - static_cast<int>(distinct.size())) + ")");
  }
  // Partial Fisher-Yates over the ranked pool.
  std::vector<int> idx(distinct.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<FailureScenario> out;
  for (int i = 0; i < opt.subset_size; ++i) {
    const auto j = i + static_cast<int>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back(distinct[idx[i]]);
  }
  return out;
}

// Cumulative per-km intensity of every grid cell over the storm window.
inline std::map<int, double> cell_intensities(const StormTrack& track, const Grid& grid,
                                              const NhppParams& params) {
  std::map<int, std::vector<double>> rates;
  for (double t : storm_hours(track)) {
    for (const auto& w : wind_field_at(track, grid.cells(), t)) {
      rates[w.cell].push_back(poisson_rate(w.v, params));
    }
  }
  std::map<int, double> out;
  for (const auto& [cell, r] : rates) out[cell] = cell_cumulative_intensity(r);
  return out;
}

inline std::vector<LineIntensity> line_intensities(const Feeder& f, const Grid& grid,
                                                   const std::map<int, double>& cell_lambda) {
  std::vector<LineIntensity> out;
  for (int e = 0; e < f.num_edges(); ++e) {
    const auto lengths = line_cell_lengths(f.edges[e].geometry, grid);
    const double lambda = line_cumulative_intensity(lengths, cell_lambda);
    out.push_back({e, lambda, line_failure_probability(lambda)});
  }
  return out;
}

inline std::vector<LineIntensity> failure_probabilities(const Feeder& f, const StormTrack& track,
                                                        const Grid& grid, const NhppParams& params) {
  track.validate();
  params.validate();
  return line_intensities(f, grid, cell_intensities(track, grid, params));
}

inline std::vector<double> probabilities_of(std::span<const LineIntensity> li) {
  std::vector<double> p;
  for (const auto& l : li) p.push_back(l.p);
  return p;
}

}  // namespace stormdn
