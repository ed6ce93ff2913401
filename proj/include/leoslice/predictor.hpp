#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "leoslice/demand.hpp"

namespace leoslice {

struct BnnConfig {
  int history_length = 10;
  int hidden_size = 16;
  double prior_std = 0.1;
  double init_log_std = -5.0;
  // Multiplier on the KL term of the variational objective.
  double kl_weight = 1.0;
  int mc_samples = 30;
  int train_mc_samples = 2;
  int epochs = 300;
  double learning_rate = 2e-3;
  double momentum = 0.9;
  double clip_norm = 5.0;
  int training_slots = 60;

  void validate() const;
};

// Affine map of the two feature components to zero mean / unit scale.
// A component that was constant during fitting has scale 0.
struct FeatureNormalization {
  double mean[2] = {0.0, 0.0};
  double scale[2] = {1.0, 1.0};

  static FeatureNormalization fit(std::span<const DemandFeature> features);
  Eigen::Vector2d apply(const DemandFeature &f) const;
  DemandFeature invert(const Eigen::Vector2d &z) const;
};

struct TensorSlot {
  std::string name;
  int rows = 0;
  int cols = 0;
  int offset = 0;
  int size() const { return rows * cols; }
};

// Gated recurrent layer (LSTM) with a linear two-output head added to the
// average of the input sequence. Every weight is a factorized Gaussian
// (mean, log-std); the observation noise of each output is a learned point
// parameter.
class BnnModel {
 public:
  BnnModel() = default;
  BnnModel(int history_length, int hidden_size, double prior_std, double init_log_std,
           std::uint64_t seed);

  int history_length() const { return history_length_; }
  int hidden_size() const { return hidden_size_; }
  double prior_std() const { return prior_std_; }
  int weight_count() const { return static_cast<int>(mean_.size()); }
  const std::vector<TensorSlot> &layout() const { return layout_; }

  Eigen::VectorXd &mean() { return mean_; }
  const Eigen::VectorXd &mean() const { return mean_; }
  Eigen::VectorXd &log_std() { return log_std_; }
  const Eigen::VectorXd &log_std() const { return log_std_; }
  Eigen::Vector2d &log_noise() { return log_noise_; }
  const Eigen::Vector2d &log_noise() const { return log_noise_; }
  FeatureNormalization &normalization() { return norm_; }
  const FeatureNormalization &normalization() const { return norm_; }

  /// Copy whose weight and observation-noise stds are all forced to zero:
  /// a deterministic recurrent network evaluated at the posterior means.
  BnnModel collapsed() const;
  bool is_collapsed() const { return zero_std_; }

  /// Closed-form KL[q || prior] summed over all weights.
  double kl_divergence() const;

  /// Draw weights w = mean + std * eps.
  Eigen::VectorXd sample_weights(const Eigen::VectorXd &eps) const;

  /// Normalized two-output prediction for a normalized input sequence.
  Eigen::Vector2d forward(const Eigen::VectorXd &weights,
                          std::span<const Eigen::Vector2d> inputs) const;

  void write_checkpoint(std::ostream &out) const;
  static BnnModel read_checkpoint(std::istream &in);

  bool operator==(const BnnModel &o) const;

 private:
  friend struct BnnGradient;

  int history_length_ = 0;
  int hidden_size_ = 0;
  double prior_std_ = 1.0;
  bool zero_std_ = false;
  std::vector<TensorSlot> layout_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd log_std_;
  Eigen::Vector2d log_noise_ = Eigen::Vector2d::Zero();
  FeatureNormalization norm_;
};

struct TrainingPair {
  std::vector<Eigen::Vector2d> inputs;  // K normalized features
  Eigen::Vector2d label;                // normalized next-slot feature
};

// Contiguous (history, next) pairs cut from one feature series.
struct TrainingSet {
  std::vector<TrainingPair> pairs;

  static TrainingSet from_features(std::span<const DemandFeature> features, int history_length,
                                   const FeatureNormalization &norm);
};

struct LossAndGradient {
  double loss = 0.0;
  double kl = 0.0;
  double nll = 0.0;
  Eigen::VectorXd grad_mean;
  Eigen::VectorXd grad_log_std;
  Eigen::Vector2d grad_log_noise = Eigen::Vector2d::Zero();
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// kl_weight * KL + Monte-Carlo average of the Gaussian negative log-likelihood
/// summed over the batch, with reparameterized gradients.
LossAndGradient elbo_loss(const BnnModel &model, const TrainingSet &batch, int mc_samples,
                          double kl_weight, std::uint64_t seed);

struct TrainResult {
  BnnModel model;
  std::vector<double> loss_curve;
  bool converged = true;
};

TrainResult train(const BnnModel &model, const TrainingSet &data, const BnnConfig &config,
                  std::uint64_t seed);

/// Fits normalization on `features`, builds the training set and trains a
/// fresh model (or continues from `warm_start` when given).
TrainResult train_on_features(std::span<const DemandFeature> features, const BnnConfig &config,
                              std::uint64_t seed, const BnnModel *warm_start = nullptr);

struct PredictedFeature {
  DemandFeature mean_feature;
  double mean_std = 0.0;
  double variance_std = 0.0;
};

/// Monte-Carlo predictive mean and spread over reparameterized passes; passes
/// run in parallel on independent seed-derived streams.
PredictedFeature predict(const BnnModel &model, std::span<const DemandFeature> history,
                         int mc_samples, std::uint64_t seed);

/// Autoregressive rollout feeding each predicted mean back as history.
std::vector<PredictedFeature> multistep_predict(const BnnModel &model,
                                                std::span<const DemandFeature> history,
                                                int steps, int mc_samples, std::uint64_t seed);

namespace reference {
PredictedFeature predict_serial(const BnnModel &model, std::span<const DemandFeature> history,
                                int mc_samples, std::uint64_t seed);
}  // namespace reference

struct PoissonFit {
  double intensity = 0.0;
  double intensity_std = 0.0;
};

struct GaussianFit {
  double mean_of_mean = 0.0;
  double std_of_mean = 0.0;
  double mean_of_variance = 0.0;
  double std_of_variance = 0.0;
};

using FittedDemandDistribution = std::variant<PoissonFit, GaussianFit>;

class NonPositiveMean : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Poisson when |variance / mean - 1| <= tolerance, Gaussian otherwise.
FittedDemandDistribution fit_distribution(const PredictedFeature &pf, double dispersion_tolerance);

/// Seed for an independent stream derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace leoslice
