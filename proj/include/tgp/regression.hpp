#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "tgp/dataset.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/sweep.hpp"

namespace tgp {

/// Zero-mean GP regression with homoscedastic Gaussian observation noise.
/// noise_std = 0 gives the noiseless interpolating model.
struct RegressionModel {
  KernelSpec kernel;
  double noise_std = 0.0;
};

struct PredictiveGaussian {
  double mean = 0.0;
  double variance = 0.0;
};

/// Factorized training system shared across test points and temperatures.
class RegressionPosterior {
 public:
  RegressionPosterior(const RegressionModel& model, const LabeledDataset& train)
      : model_(model), train_inputs_(train.inputs) {
    train.validate();
    require(!train.is_classification(), ErrorCode::InvalidArgument, "regression needs real-valued targets");
    require(model.noise_std >= 0.0 && std::isfinite(model.noise_std), ErrorCode::InvalidArgument,
            "noise_std must be >= 0");
    Matrix k_tilde = gram(model.kernel, train.inputs);
    k_tilde.diagonal().array() += model.noise_std * model.noise_std;
    factor_ = cholesky(k_tilde);
    alpha_ = solve_spd(factor_, train.targets);
  }

  const SpdFactor& factor() const noexcept { return factor_; }
  const RegressionModel& model() const noexcept { return model_; }

  std::vector<PredictiveGaussian> predict(const Matrix& test_inputs) const {
    require(test_inputs.cols() == train_inputs_.cols(), ErrorCode::DimensionMismatch,
            "posterior_predict: test input dimension differs from training");
    const Matrix cross = gram(model_.kernel, train_inputs_, test_inputs);  // n x p
    const Matrix white = solve_lower(factor_, cross);
    const double noise_var = model_.noise_std * model_.noise_std;
    std::vector<PredictiveGaussian> out(static_cast<std::size_t>(test_inputs.rows()));
    for (Eigen::Index j = 0; j < test_inputs.rows(); ++j) {
      const double prior_var = kernel_eval(model_.kernel, test_inputs.row(j), test_inputs.row(j));
      const double explained = white.col(j).squaredNorm();
      out[static_cast<std::size_t>(j)] = {cross.col(j).dot(alpha_), std::max(prior_var - explained, 0.0) + noise_var};
    }
    return out;
  }

 private:
  RegressionModel model_;
  Matrix train_inputs_;
  SpdFactor factor_;
  Vector alpha_;
};

inline std::vector<PredictiveGaussian> posterior_predict(const RegressionModel& model, const LabeledDataset& train,
                                                         const Matrix& test_inputs) {
  return RegressionPosterior(model, train).predict(test_inputs);
}

inline PredictiveGaussian temper_predictive(PredictiveGaussian pred, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  pred.variance *= t;
  return pred;
}

inline std::vector<PredictiveGaussian> temper_predictive(std::vector<PredictiveGaussian> preds, double t) {
  for (auto& p : preds) p = temper_predictive(p, t);
  return preds;
}

/// Mean negative log density of the targets under the per-point Gaussians.
inline double gaussian_test_nll(std::span<const PredictiveGaussian> preds, const Vector& targets) {
  require(static_cast<Eigen::Index>(preds.size()) == targets.size(), ErrorCode::LengthMismatch,
          "gaussian_test_nll: prediction and target counts differ");
  require(!preds.empty(), ErrorCode::EmptyInput, "gaussian_test_nll: no predictions");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double var = preds[i].variance;
    require(var > 0.0, ErrorCode::ZeroVariance, "gaussian_test_nll: non-positive predictive variance");
    const double r = targets[static_cast<Eigen::Index>(i)] - preds[i].mean;
    total += 0.5 * std::log(2.0 * std::numbers::pi * var) + r * r / (2.0 * var);
  }
  return total / static_cast<double>(preds.size());
}

struct RegressionSweep {
  std::vector<SweepRecord> records;
  double argmin_temperature = 1.0;
};

inline RegressionSweep regression_temperature_sweep(const RegressionModel& model, const LabeledDataset& train,
                                                    const LabeledDataset& test, std::span<const double> temperatures,
                                                    std::uint64_t seed = 0) {
  validate_temperatures(temperatures);
  test.validate();
  const auto preds = RegressionPosterior(model, train).predict(test.inputs);
  RegressionSweep sweep;
  for (double t : temperatures) {
    const auto tempered = temper_predictive(preds, t);
    sweep.records.push_back({t, {{"test_nll", gaussian_test_nll(tempered, test.targets)}}, seed});
  }
  sweep.argmin_temperature = sweep.records[best_record(sweep.records, "test_nll", true)].temperature;
  return sweep;
}

}  // namespace tgp
