#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tgp/dataset.hpp"
#include "tgp/ess.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/parallel.hpp"
#include "tgp/rng.hpp"
#include "tgp/sweep.hpp"

namespace tgp {

/// (1/t) * sum_i log softmax(F_i)_{y_i}.
inline double tempered_log_likelihood(const Matrix& latent, std::span<const int> labels, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  require(static_cast<Eigen::Index>(labels.size()) == latent.rows(), ErrorCode::LengthMismatch,
          "tempered_log_likelihood: label count differs from latent rows");
  double total = 0.0;
  for (Eigen::Index i = 0; i < latent.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < latent.cols(), ErrorCode::LabelOutOfRange, "tempered_log_likelihood: label out of range");
    total += latent(i, y) - log_sum_exp(latent.row(i));
  }
  return total / t;
}

struct EssConfig {
  int n_chains = 4;
  int burn_in = 1000;
  int n_samples_per_chain = 500;
  int thinning = 5;

  void validate() const {
    require(n_chains >= 1 && burn_in >= 0 && n_samples_per_chain >= 1 && thinning >= 1, ErrorCode::InvalidArgument,
            "EssConfig: n_chains, n_samples_per_chain, thinning must be >= 1 and burn_in >= 0");
  }
  int total_samples() const { return n_chains * n_samples_per_chain; }
};

/// Retained draws of the training latent matrix, stored chain-major.
struct LatentSampleSet {
  std::vector<Matrix> samples;
  double temperature = 1.0;
  KernelSpec kernel;
  Matrix train_inputs;
  std::vector<int> train_labels;
  int class_count = 0;
  EssConfig config;
  std::uint64_t seed = 0;
  double prior_jitter = 0.0;
  std::vector<double> mean_proposals;  // per chain
};

/// Stream index reserved for predictive draws under a run seed.
inline constexpr std::uint64_t kPredictiveStream = std::uint64_t{1} << 32;

inline LatentSampleSet sample_latent_posterior(const KernelSpec& kernel, const LabeledDataset& train, double t,
                                               const EssConfig& config, std::uint64_t seed, int threads = 1) {
  train.validate();
  require(train.is_classification(), ErrorCode::InvalidArgument, "sample_latent_posterior: needs class labels");
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  config.validate();

  const SpdFactor prior = cholesky(gram(scale_kernel(kernel, t), train.inputs));
  const std::vector<int>& labels = train.labels;
  auto log_lik = [&labels, t](const Matrix& f) { return tempered_log_likelihood(f, labels, t); };

  std::vector<ChainRun> runs(static_cast<std::size_t>(config.n_chains));
  parallel_for(config.n_chains, threads, [&](int chain) {
    RngStream rng(seed, static_cast<std::uint64_t>(chain));
    runs[static_cast<std::size_t>(chain)] =
        run_ess_chain(Matrix::Zero(train.size(), train.class_count), log_lik, prior, config.burn_in,
                      config.n_samples_per_chain, config.thinning, rng);
  });

  LatentSampleSet out;
  out.temperature = t;
  out.kernel = kernel;
  out.train_inputs = train.inputs;
  out.train_labels = train.labels;
  out.class_count = train.class_count;
  out.config = config;
  out.seed = seed;
  out.prior_jitter = prior.jitter_used();
  for (auto& run : runs) {
    out.mean_proposals.push_back(run.mean_proposals);
    for (auto& s : run.samples) out.samples.push_back(std::move(s));
  }
  return out;
}

/// Conditional Gaussian of test latents given training latents, per class:
/// mean K(x*,X) K(X,X)^{-1} F_c and variance T (k** - k*^T K^{-1} k*).
/// The temperature cancels in the mean, so K(X,X) is factored unscaled.
class LatentPredictor {
 public:
  LatentPredictor(const KernelSpec& kernel, const Matrix& train_inputs, double t, const Matrix& test_inputs) {
    require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveTemperature, "temperature must be > 0");
    const Eigen::Index n = train_inputs.rows();
    const Eigen::Index p = test_inputs.rows();
    const Vector prior_diag = gram_diagonal(kernel, test_inputs);
    if (n == 0) {
      weights_ = Matrix::Zero(0, p);
      variance_ = t * prior_diag;
      return;
    }
    require(train_inputs.cols() == test_inputs.cols(), ErrorCode::DimensionMismatch,
            "LatentPredictor: test input dimension differs from training");
    const SpdFactor factor = cholesky(gram(kernel, train_inputs));
    jitter_ = factor.jitter_used();
    const Matrix cross = gram(kernel, train_inputs, test_inputs);  // n x p
    weights_ = solve_spd(factor, cross);
    const Matrix white = solve_lower(factor, cross);
    variance_.resize(p);
    for (Eigen::Index j = 0; j < p; ++j)
      variance_[j] = t * std::max(prior_diag[j] - white.col(j).squaredNorm(), 0.0);
  }

  /// p x C conditional means for one training latent matrix.
  Matrix mean(const Matrix& latent) const { return weights_.transpose() * latent; }
  const Vector& variance() const noexcept { return variance_; }
  double jitter_used() const noexcept { return jitter_; }

 private:
  Matrix weights_;  // K(X,X)^{-1} K(X,x*)
  Vector variance_;
  double jitter_ = 0.0;
};

namespace detail {

/// Monte Carlo predictive probabilities accumulated per contiguous group of
/// `group_size` samples. Draw order: sample, draw, test point, class.
inline std::vector<Matrix> grouped_predictive(const LatentSampleSet& set, const Matrix& test_inputs,
                                              int draws_per_sample, RngStream& rng, std::size_t group_size) {
  require(!set.samples.empty(), ErrorCode::EmptyInput, "predictive_class_probs: no samples");
  require(draws_per_sample >= 1, ErrorCode::InvalidArgument, "draws_per_sample must be >= 1");
  const Eigen::Index c = set.samples.front().cols();
  const Eigen::Index p = test_inputs.rows();
  const LatentPredictor predictor(set.kernel, set.train_inputs, set.temperature, test_inputs);
  const Vector sd = predictor.variance().cwiseSqrt();

  const std::size_t groups = (set.samples.size() + group_size - 1) / group_size;
  std::vector<Matrix> acc(groups, Matrix::Zero(p, c));
  Vector f(c);
  for (std::size_t s = 0; s < set.samples.size(); ++s) {
    const Matrix mu = predictor.mean(set.samples[s]);
    Matrix& target = acc[s / group_size];
    for (int r = 0; r < draws_per_sample; ++r) {
      for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = 0; k < c; ++k) f[k] = mu(j, k) + sd[j] * rng.normal();
        const double lse = log_sum_exp(f);
        for (Eigen::Index k = 0; k < c; ++k) target(j, k) += std::exp(f[k] - lse);
      }
    }
  }
  for (auto& m : acc) {
    for (Eigen::Index j = 0; j < p; ++j) m.row(j) /= m.row(j).sum();
  }
  return acc;
}

}  // namespace detail

/// Averages softmax(f*) over retained samples and conditional draws; rows
/// are probability vectors.
inline Matrix predictive_class_probs(const LatentSampleSet& set, const Matrix& test_inputs, int draws_per_sample,
                                     RngStream& rng) {
  return detail::grouped_predictive(set, test_inputs, draws_per_sample, rng, set.samples.size()).front();
}

struct ClassificationMetrics {
  double mean_log_predictive = 0.0;
  double top1_accuracy = 0.0;
};

inline constexpr double kProbabilityFloor = 1e-12;

inline ClassificationMetrics classification_metrics(const Matrix& probs, std::span<const int> labels) {
  require(static_cast<Eigen::Index>(labels.size()) == probs.rows(), ErrorCode::LengthMismatch,
          "classification_metrics: label count differs from probability rows");
  require(probs.rows() > 0, ErrorCode::EmptyInput, "classification_metrics: no rows");
  double log_total = 0.0;
  int correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < probs.cols(), ErrorCode::LabelOutOfRange, "classification_metrics: label out of range");
    log_total += std::log(std::max(probs(i, y), kProbabilityFloor));
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k)
      if (probs(i, k) > probs(i, arg)) arg = k;
    if (arg == y) ++correct;
  }
  const double n = static_cast<double>(probs.rows());
  return {log_total / n, correct / n};
}

struct ClassificationSweep {
  std::vector<SweepRecord> records;
  std::vector<LatentSampleSet> runs;  // only kept when requested
  std::vector<double> mean_proposals;
  std::vector<double> jitter;
};

struct ClassificationSweepOptions {
  EssConfig ess;
  int draws_per_sample = 8;
  int threads = 1;
  bool keep_samples = false;
};

/// Metrics per temperature. Temperature k runs under seed mix_seed(seed, k);
/// its chains use stream indices 0..n_chains-1 and the predictive draws use
/// kPredictiveStream. Each record carries Monte Carlo standard errors
/// estimated from the spread of per-chain metrics.
inline ClassificationSweep classification_temperature_sweep(const KernelSpec& kernel, const LabeledDataset& train,
                                                            const LabeledDataset& test,
                                                            std::span<const double> temperatures,
                                                            const ClassificationSweepOptions& options,
                                                            std::uint64_t seed) {
  validate_temperatures(temperatures);
  test.validate();
  require(test.is_classification(), ErrorCode::InvalidArgument, "test split needs class labels");
  require(test.dim() == train.dim(), ErrorCode::DimensionMismatch, "train/test dimensions differ");

  ClassificationSweep sweep;
  for (std::size_t k = 0; k < temperatures.size(); ++k) {
    const double t = temperatures[k];
    const std::uint64_t run_seed = mix_seed(seed, k);
    LatentSampleSet set = sample_latent_posterior(kernel, train, t, options.ess, run_seed, options.threads);
    RngStream rng(run_seed, kPredictiveStream);
    const auto by_chain = detail::grouped_predictive(set, test.inputs, options.draws_per_sample, rng,
                                                     static_cast<std::size_t>(options.ess.n_samples_per_chain));
    Matrix pooled = Matrix::Zero(test.size(), train.class_count);
    std::vector<ClassificationMetrics> chain_metrics;
    for (const auto& m : by_chain) {
      pooled += m;
      chain_metrics.push_back(classification_metrics(m, test.labels));
    }
    pooled /= static_cast<double>(by_chain.size());
    const auto metrics = classification_metrics(pooled, test.labels);

    double se_ll = 0.0, se_acc = 0.0;
    const double m = static_cast<double>(chain_metrics.size());
    if (chain_metrics.size() > 1) {
      double mean_ll = 0.0, mean_acc = 0.0;
      for (const auto& cm : chain_metrics) {
        mean_ll += cm.mean_log_predictive / m;
        mean_acc += cm.top1_accuracy / m;
      }
      for (const auto& cm : chain_metrics) {
        se_ll += (cm.mean_log_predictive - mean_ll) * (cm.mean_log_predictive - mean_ll);
        se_acc += (cm.top1_accuracy - mean_acc) * (cm.top1_accuracy - mean_acc);
      }
      se_ll = std::sqrt(se_ll / (m - 1.0) / m);
      se_acc = std::sqrt(se_acc / (m - 1.0) / m);
    }

    SweepRecord rec;
    rec.temperature = t;
    rec.seed = seed;
    rec.metrics = {{"test_log_likelihood", metrics.mean_log_predictive},
                   {"top1_accuracy", metrics.top1_accuracy},
                   {"test_log_likelihood_se", se_ll},
                   {"top1_accuracy_se", se_acc}};
    sweep.records.push_back(std::move(rec));
    double prop = 0.0;
    for (double v : set.mean_proposals) prop += v / static_cast<double>(set.mean_proposals.size());
    sweep.mean_proposals.push_back(prop);
    sweep.jitter.push_back(set.prior_jitter);
    if (options.keep_samples) sweep.runs.push_back(std::move(set));
  }
  return sweep;
}

}  // namespace tgp
