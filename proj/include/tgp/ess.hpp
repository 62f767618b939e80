#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/linalg.hpp"
#include "tgp/rng.hpp"

namespace tgp {

/// Latent matrix (n x C) together with its cached log-likelihood.
struct LatentState {
  Matrix latent;
  double log_likelihood = 0.0;
};

struct EssStep {
  LatentState state;
  int proposals = 0;
};

/// Draws an n x C matrix whose columns are independent N(0, L L^T).
inline Matrix draw_prior_columns(const SpdFactor& prior, Eigen::Index columns, RngStream& rng) {
  Matrix z(prior.dimension(), columns);
  for (Eigen::Index c = 0; c < columns; ++c)
    for (Eigen::Index i = 0; i < prior.dimension(); ++i) z(i, c) = rng.normal();
  return prior.lower().triangularView<Eigen::Lower>() * z;
}

/// One elliptical slice sampling update for a zero-mean Gaussian prior whose
/// columns share the covariance factored in `prior`.
///
/// Draw order from rng: the auxiliary prior draw (column-major), the slice
/// height, the initial angle, then one uniform per bracket shrink.
template <typename LogLikelihood>
EssStep ess_transition(const LatentState& current, LogLikelihood&& log_likelihood, const SpdFactor& prior,
                       RngStream& rng) {
  require(current.latent.rows() == prior.dimension(), ErrorCode::DimensionMismatch,
          "ess_transition: latent rows differ from prior dimension");
  require(std::isfinite(current.log_likelihood), ErrorCode::NonFiniteLikelihood,
          "ess_transition: current log-likelihood is not finite");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const Matrix nu = draw_prior_columns(prior, current.latent.cols(), rng);
  const double log_height = current.log_likelihood + std::log(rng.uniform());
  double theta = rng.uniform(0.0, two_pi);
  double lo = theta - two_pi;
  double hi = theta;

  int proposals = 0;
  for (;;) {
    ++proposals;
    Matrix proposal = current.latent * std::cos(theta) + nu * std::sin(theta);
    const double ll = log_likelihood(proposal);
    if (std::isnan(ll))
      throw Error(ErrorCode::NonFiniteLikelihood, "ess_transition: log-likelihood evaluated to NaN");
    if (ll > log_height) return {{std::move(proposal), ll}, proposals};
    if (theta < 0.0)
      lo = theta;
    else
      hi = theta;
    // Bracket collapsed onto the current point (theta = 0 is always inside).
    if (hi - lo < 1e-14) return {current, proposals};
    theta = rng.uniform(lo, hi);
  }
}

struct ChainRun {
  std::vector<Matrix> samples;
  double mean_proposals = 0.0;
  LatentState final_state;
};

/// Runs burn_in transitions, then keeps every `thinning`-th state until
/// `n_samples` are retained.
template <typename LogLikelihood>
ChainRun run_ess_chain(Matrix initial, LogLikelihood&& log_likelihood, const SpdFactor& prior, int burn_in,
                       int n_samples, int thinning, RngStream& rng) {
  require(burn_in >= 0 && n_samples >= 1 && thinning >= 1, ErrorCode::InvalidArgument,
          "run_ess_chain: bad chain lengths");
  LatentState state{std::move(initial), 0.0};
  state.log_likelihood = log_likelihood(state.latent);
  ChainRun run;
  run.samples.reserve(static_cast<std::size_t>(n_samples));
  long long proposals = 0;
  long long steps = 0;
  const long long total = burn_in + static_cast<long long>(n_samples) * thinning;
  for (long long step = 1; step <= total; ++step) {
    EssStep next = ess_transition(state, log_likelihood, prior, rng);
    proposals += next.proposals;
    ++steps;
    state = std::move(next.state);
    if (step > burn_in && (step - burn_in) % thinning == 0) run.samples.push_back(state.latent);
  }
  run.mean_proposals = steps > 0 ? static_cast<double>(proposals) / static_cast<double>(steps) : 0.0;
  run.final_state = std::move(state);
  return run;
}

}  // namespace tgp
