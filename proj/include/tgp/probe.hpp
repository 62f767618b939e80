#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tgp/classification.hpp"
#include "tgp/error.hpp"
#include "tgp/linalg.hpp"
#include "tgp/quadrature.hpp"

namespace tgp {

/// Binary model with latent prior f(x) ~ N(0, c I), tempered at T.
struct ProbeConfig {
  double latent_scale = 1000.0;
  double temperature = 1.0;
  double quadrature_tolerance = 1e-8;
  double integration_half_width_sigmas = 40.0;

  void validate() const {
    require(latent_scale > 0.0 && std::isfinite(latent_scale), ErrorCode::InvalidArgument, "latent_scale must be > 0");
    require(temperature > 0.0 && std::isfinite(temperature), ErrorCode::NonPositiveTemperature,
            "temperature must be > 0");
    require(quadrature_tolerance > 0.0, ErrorCode::InvalidArgument, "quadrature_tolerance must be > 0");
    require(integration_half_width_sigmas > 0.0, ErrorCode::InvalidArgument,
            "integration_half_width_sigmas must be > 0");
  }
};

/// Probability that a fresh label of a training input differs from the
/// observed one, under the tempered posterior of the binary latent model.
///
/// With d = f_y - f_y' the tempered prior is N(0, 2cT) and the tempered
/// likelihood sigmoid(d)^{1/T}, so the posterior density is proportional to
/// exp(-(softplus(-d) + d^2 / (4c)) / T). Weights are evaluated relative to
/// their mode, which solves sigmoid(-d) = d / (2c) for every T.
inline double relabel_prob_quadrature(const ProbeConfig& cfg) {
  cfg.validate();
  const double c = cfg.latent_scale;
  const double t = cfg.temperature;
  auto energy = [c](double d) { return softplus(-d) + d * d / (4.0 * c); };

  double lo = 0.0, hi = 2.0 * c;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 / (1.0 + std::exp(mid)) - mid / (2.0 * c) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double mode = 0.5 * (lo + hi);
  const double min_energy = energy(mode);

  const double prior_sd = std::sqrt(2.0 * c * t);
  const double half_width = cfg.integration_half_width_sigmas * prior_sd;
  const double a = std::min(-half_width, mode - half_width);
  const double b = std::max(half_width, mode + half_width);

  auto integrand = [&](double d) -> std::array<double, 2> {
    const double w = std::exp(-(energy(d) - min_energy) / t);
    const double flip = std::exp(-softplus(d));  // sigmoid(-d)
    return {flip * w, w};
  };
  const auto result = adaptive_simpson<2>(integrand, a, b, cfg.quadrature_tolerance);
  return result.value[0] / result.value[1];
}

struct ProbeRow {
  double latent_scale = 0.0;
  double temperature = 1.0;
  double probability = 0.0;
  double ratio = 1.0;
};

/// ratio(c, T) = p_T / p_1 for every (c, T) on the grids. T = 1 is appended
/// to the temperature grid when absent.
inline std::vector<ProbeRow> relabel_ratio_curve(std::span<const double> scales, std::span<const double> temperatures,
                                                 const ProbeConfig& defaults = {}) {
  require(!scales.empty() && !temperatures.empty(), ErrorCode::EmptyInput, "relabel_ratio_curve: empty grid");
  std::vector<double> temps(temperatures.begin(), temperatures.end());
  if (std::find(temps.begin(), temps.end(), 1.0) == temps.end()) temps.push_back(1.0);

  std::vector<ProbeRow> rows;
  for (double c : scales) {
    ProbeConfig cfg = defaults;
    cfg.latent_scale = c;
    cfg.temperature = 1.0;
    const double reference = relabel_prob_quadrature(cfg);
    for (double t : temps) {
      cfg.temperature = t;
      const double p = t == 1.0 ? reference : relabel_prob_quadrature(cfg);
      rows.push_back({c, t, p, p / reference});
    }
  }
  return rows;
}

/// Sample average of the probability mass on labels other than the observed
/// one at a training point.
inline double relabel_prob_mc(const LatentSampleSet& set, Eigen::Index point_index, int observed_label) {
  require(!set.samples.empty(), ErrorCode::EmptyInput, "relabel_prob_mc: no samples");
  const Matrix& first = set.samples.front();
  require(point_index >= 0 && point_index < first.rows(), ErrorCode::IndexOutOfRange,
          "relabel_prob_mc: point index outside the training set");
  require(observed_label >= 0 && observed_label < first.cols(), ErrorCode::LabelOutOfRange,
          "relabel_prob_mc: label out of range");
  double total = 0.0;
  for (const auto& f : set.samples) {
    const auto row = f.row(point_index);
    const double lse = log_sum_exp(row);
    for (Eigen::Index k = 0; k < row.size(); ++k)
      if (k != observed_label) total += std::exp(row(k) - lse);
  }
  return total / static_cast<double>(set.samples.size());
}

}  // namespace tgp
