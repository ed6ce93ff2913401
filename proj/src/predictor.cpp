#include "leoslice/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace leoslice {

namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

using ConstMatMap = Map<const MatrixXd>;
using ConstVecMap = Map<const VectorXd>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

VectorXd standard_normal(std::mt19937_64 &rng, int n) {
  std::normal_distribution<double> draw(0.0, 1.0);
  VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = draw(rng);
  }
  return out;
}

// Views of one sampled weight vector in the layout order of BnnModel.
struct LstmWeights {
  ConstMatMap wx;
  ConstMatMap wh;
  ConstVecMap bias;
  ConstMatMap wo;
  ConstVecMap bo;

  LstmWeights(const std::vector<TensorSlot> &layout, const VectorXd &w)
      : wx(w.data() + layout[0].offset, layout[0].rows, layout[0].cols),
        wh(w.data() + layout[1].offset, layout[1].rows, layout[1].cols),
        bias(w.data() + layout[2].offset, layout[2].rows),
        wo(w.data() + layout[3].offset, layout[3].rows, layout[3].cols),
        bo(w.data() + layout[4].offset, layout[4].rows) {}
};

struct StepCache {
  VectorXd h_prev, c_prev, i, f, g, o, c, tanh_c;
};

// Runs the cell over the sequence; fills `steps` when non-null.
VectorXd run_cell(const LstmWeights &w, int hidden, std::span<const Vector2d> inputs,
                  std::vector<StepCache> *steps) {
  VectorXd h = VectorXd::Zero(hidden);
  VectorXd c = VectorXd::Zero(hidden);
  for (const Vector2d &x : inputs) {
    const VectorXd z = w.wx * x + w.wh * h + w.bias;
    StepCache s;
    s.h_prev = h;
    s.c_prev = c;
    s.i = z.segment(0, hidden).unaryExpr(&sigmoid);
    s.f = z.segment(hidden, hidden).unaryExpr(&sigmoid);
    s.g = z.segment(2 * hidden, hidden).array().tanh();
    s.o = z.segment(3 * hidden, hidden).unaryExpr(&sigmoid);
    c = s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
    s.c = c;
    s.tanh_c = c.array().tanh();
    h = s.o.cwiseProduct(s.tanh_c);
    if (steps != nullptr) {
      steps->push_back(std::move(s));
    }
  }
  return h;
}

// The head predicts a correction to the average of the input sequence.
Vector2d input_average(std::span<const Vector2d> inputs) {
  Vector2d avg = Vector2d::Zero();
  for (const Vector2d &x : inputs) {
    avg += x;
  }
  return inputs.empty() ? avg : Vector2d(avg / static_cast<double>(inputs.size()));
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

std::vector<Eigen::Vector2d> normalized_history(const BnnModel &model,
                                                std::span<const DemandFeature> history) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(history.size());
  for (const auto &f : history) {
    out.push_back(model.normalization().apply(f));
  }
  return out;
}

// One reparameterized predictive draw in feature units.
DemandFeature predictive_draw(const BnnModel &model, const std::vector<Eigen::Vector2d> &inputs,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const VectorXd eps = standard_normal(rng, model.weight_count());
  const VectorXd w = model.sample_weights(eps);
  Vector2d z = model.forward(w, inputs);
  const Vector2d noise = standard_normal(rng, 2);
  z += model.log_noise().array().exp().matrix().cwiseProduct(noise);
  return model.normalization().invert(z);
}

PredictedFeature summarize(const std::vector<DemandFeature> &draws) {
  const double n = static_cast<double>(draws.size());
  PredictedFeature pf;
  for (const auto &d : draws) {
    pf.mean_feature.mean += d.mean;
    pf.mean_feature.variance += d.variance;
  }
  pf.mean_feature.mean /= n;
  pf.mean_feature.variance /= n;
  if (draws.size() < 2) {
    return pf;
  }
  double sm = 0.0;
  double sv = 0.0;
  for (const auto &d : draws) {
    sm += (d.mean - pf.mean_feature.mean) * (d.mean - pf.mean_feature.mean);
    sv += (d.variance - pf.mean_feature.variance) * (d.variance - pf.mean_feature.variance);
  }
  pf.mean_std = std::sqrt(sm / (n - 1.0));
  pf.variance_std = std::sqrt(sv / (n - 1.0));
  return pf;
}

void check_history(const BnnModel &model, std::span<const DemandFeature> history, int mc_samples) {
  if (static_cast<int>(history.size()) != model.history_length()) {
    throw std::invalid_argument("predict: history length must equal the model's K");
  }
  if (mc_samples < 1) {
    throw std::invalid_argument("predict: mc_samples must be >= 1");
  }
}

}  // namespace

void BnnConfig::validate() const {
  if (history_length < 1 || hidden_size < 1) {
    throw std::invalid_argument("predictor: history_length and hidden_size must be >= 1");
  }
  if (!(prior_std > 0.0) || mc_samples < 1 || train_mc_samples < 1 || epochs < 0) {
    throw std::invalid_argument("predictor: invalid sampling or prior settings");
  }
  if (!(learning_rate > 0.0) || momentum < 0.0 || momentum >= 1.0 || !(clip_norm > 0.0)) {
    throw std::invalid_argument("predictor: invalid optimizer settings");
  }
  if (training_slots < history_length + 1) {
    throw std::invalid_argument("predictor: training_slots must exceed history_length");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- normalization

FeatureNormalization FeatureNormalization::fit(std::span<const DemandFeature> features) {
  FeatureNormalization n;
  if (features.empty()) {
    return n;
  }
  const double count = static_cast<double>(features.size());
  for (int k = 0; k < 2; ++k) {
    double m = 0.0;
    for (const auto &f : features) {
      m += k == 0 ? f.mean : f.variance;
    }
    m /= count;
    double v = 0.0;
    for (const auto &f : features) {
      const double x = (k == 0 ? f.mean : f.variance) - m;
      v += x * x;
    }
    const double sd = std::sqrt(v / count);
    n.mean[k] = m;
    // A constant component gets scale 0: it is predicted exactly.
    n.scale[k] = sd == 0.0 ? 0.0 : std::max(sd, 1e-3 * std::abs(m));
  }
  return n;
}

Eigen::Vector2d FeatureNormalization::apply(const DemandFeature &f) const {
  const auto z = [&](int k, double x) { return scale[k] == 0.0 ? 0.0 : (x - mean[k]) / scale[k]; };
  return {z(0, f.mean), z(1, f.variance)};
}

DemandFeature FeatureNormalization::invert(const Eigen::Vector2d &z) const {
  return {mean[0] + scale[0] * z[0], mean[1] + scale[1] * z[1]};
}

// ---------------------------------------------------------------- model

BnnModel::BnnModel(int history_length, int hidden_size, double prior_std, double init_log_std,
                   std::uint64_t seed)
    : history_length_(history_length), hidden_size_(hidden_size), prior_std_(prior_std) {
  if (history_length < 1 || hidden_size < 1 || !(prior_std > 0.0)) {
    throw std::invalid_argument("BnnModel: invalid dimensions or prior");
  }
  const int g = 4 * hidden_size;
  int offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    layout_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  add("lstm.w_x", g, 2);
  add("lstm.w_h", g, hidden_size);
  add("lstm.bias", g, 1);
  add("head.w", 2, hidden_size);
  add("head.bias", 2, 1);

  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::uniform_real_distribution<double> init(-bound, bound);
  mean_.resize(offset);
  for (int i = 0; i < offset; ++i) {
    mean_[i] = init(rng);
  }
  // forget-gate bias starts open
  const auto &bias = layout_[2];
  for (int i = hidden_size; i < 2 * hidden_size; ++i) {
    mean_[bias.offset + i] = 1.0;
  }
  // zero head: an untrained model predicts the input average
  for (int l = 3; l < 5; ++l) {
    mean_.segment(layout_[l].offset, layout_[l].size()).setZero();
  }
  log_std_ = VectorXd::Constant(offset, init_log_std);
}

BnnModel BnnModel::collapsed() const {
  BnnModel copy = *this;
  copy.zero_std_ = true;
  return copy;
}

double BnnModel::kl_divergence() const {
  const double var_p = prior_std_ * prior_std_;
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean_.size(); ++i) {
    const double ls = log_std_[i];
    kl += std::log(prior_std_) - ls + (std::exp(2.0 * ls) + mean_[i] * mean_[i]) / (2.0 * var_p) -
          0.5;
  }
  return kl;
}

Eigen::VectorXd BnnModel::sample_weights(const Eigen::VectorXd &eps) const {
  if (zero_std_) {
    return mean_;
  }
  return mean_ + log_std_.array().exp().matrix().cwiseProduct(eps);
}

Eigen::Vector2d BnnModel::forward(const Eigen::VectorXd &weights,
                                  std::span<const Eigen::Vector2d> inputs) const {
  const LstmWeights w(layout_, weights);
  const VectorXd h = run_cell(w, hidden_size_, inputs, nullptr);
  return w.wo * h + w.bo + input_average(inputs);
}

bool BnnModel::operator==(const BnnModel &o) const {
  return history_length_ == o.history_length_ && hidden_size_ == o.hidden_size_ &&
         prior_std_ == o.prior_std_ && zero_std_ == o.zero_std_ && mean_ == o.mean_ &&
         log_std_ == o.log_std_ && log_noise_ == o.log_noise_ &&
         std::equal(norm_.mean, norm_.mean + 2, o.norm_.mean) &&
         std::equal(norm_.scale, norm_.scale + 2, o.norm_.scale);
}

// Checkpoint: whitespace-separated text, one record per line.
void BnnModel::write_checkpoint(std::ostream &out) const {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "leoslice-bnn 1\n";
  out << "history_length " << history_length_ << '\n';
  out << "hidden_size " << hidden_size_ << '\n';
  out << "prior_std " << prior_std_ << '\n';
  out << "collapsed " << (zero_std_ ? 1 : 0) << '\n';
  out << "normalization " << norm_.mean[0] << ' ' << norm_.mean[1] << ' ' << norm_.scale[0] << ' '
      << norm_.scale[1] << '\n';
  out << "log_noise " << log_noise_[0] << ' ' << log_noise_[1] << '\n';
  for (const auto &slot : layout_) {
    out << "layer " << slot.name << ' ' << slot.rows << ' ' << slot.cols << '\n';
    out << "mean";
    for (int i = 0; i < slot.size(); ++i) {
      out << ' ' << mean_[slot.offset + i];
    }
    out << "\nlog_std";
    for (int i = 0; i < slot.size(); ++i) {
      out << ' ' << log_std_[slot.offset + i];
    }
    out << '\n';
  }
  out << "end\n";
}

BnnModel BnnModel::read_checkpoint(std::istream &in) {
  auto expect = [&](const char *key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw std::runtime_error(std::string("checkpoint: expected '") + key + "'");
    }
  };
  expect("leoslice-bnn");
  int version = 0;
  in >> version;
  if (version != 1) {
    throw std::runtime_error("checkpoint: unsupported version");
  }
  int k = 0;
  int hidden = 0;
  double prior = 1.0;
  int collapsed = 0;
  expect("history_length");
  in >> k;
  expect("hidden_size");
  in >> hidden;
  expect("prior_std");
  in >> prior;
  expect("collapsed");
  in >> collapsed;
  BnnModel model(k, hidden, prior, 0.0, 0);
  model.zero_std_ = collapsed != 0;
  expect("normalization");
  in >> model.norm_.mean[0] >> model.norm_.mean[1] >> model.norm_.scale[0] >> model.norm_.scale[1];
  expect("log_noise");
  in >> model.log_noise_[0] >> model.log_noise_[1];
  for (const auto &slot : model.layout_) {
    expect("layer");
    std::string name;
    int rows = 0;
    int cols = 0;
    in >> name >> rows >> cols;
    if (name != slot.name || rows != slot.rows || cols != slot.cols) {
      throw std::runtime_error("checkpoint: layer mismatch at " + slot.name);
    }
    expect("mean");
    for (int i = 0; i < slot.size(); ++i) {
      in >> model.mean_[slot.offset + i];
    }
    expect("log_std");
    for (int i = 0; i < slot.size(); ++i) {
      in >> model.log_std_[slot.offset + i];
    }
  }
  expect("end");
  if (!in) {
    throw std::runtime_error("checkpoint: truncated file");
  }
  return model;
}

// ---------------------------------------------------------------- training set

TrainingSet TrainingSet::from_features(std::span<const DemandFeature> features, int history_length,
                                       const FeatureNormalization &norm) {
  TrainingSet set;
  for (std::size_t end = static_cast<std::size_t>(history_length); end < features.size(); ++end) {
    TrainingPair pair;
    for (std::size_t i = end - history_length; i < end; ++i) {
      pair.inputs.push_back(norm.apply(features[i]));
    }
    pair.label = norm.apply(features[end]);
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

// ---------------------------------------------------------------- objective

struct BnnGradient {
  // Accumulates dNLL/dw for one sampled weight vector over the batch and
  // returns the NLL; also adds dNLL/dlog_noise.
  static double accumulate(const BnnModel &model, const VectorXd &w, const TrainingSet &batch,
                           VectorXd &grad_w, Vector2d &grad_noise) {
    const auto &layout = model.layout_;
    const int hidden = model.hidden_size_;
    const LstmWeights lw(layout, w);
    Map<MatrixXd> gwx(grad_w.data() + layout[0].offset, layout[0].rows, layout[0].cols);
    Map<MatrixXd> gwh(grad_w.data() + layout[1].offset, layout[1].rows, layout[1].cols);
    Map<VectorXd> gb(grad_w.data() + layout[2].offset, layout[2].rows);
    Map<MatrixXd> gwo(grad_w.data() + layout[3].offset, layout[3].rows, layout[3].cols);
    Map<VectorXd> gbo(grad_w.data() + layout[4].offset, layout[4].rows);
    const Vector2d inv_var = (-2.0 * model.log_noise_).array().exp();

    double nll = 0.0;
    std::vector<StepCache> steps;
    for (const auto &pair : batch.pairs) {
      steps.clear();
      const VectorXd h_last = run_cell(lw, hidden, pair.inputs, &steps);
      const Vector2d y = lw.wo * h_last + lw.bo + input_average(pair.inputs);
      const Vector2d err = y - pair.label;
      for (int k = 0; k < 2; ++k) {
        nll += 0.5 * err[k] * err[k] * inv_var[k] + model.log_noise_[k] + kHalfLog2Pi;
        grad_noise[k] += 1.0 - err[k] * err[k] * inv_var[k];
      }
      const Vector2d dy = err.cwiseProduct(inv_var);
      gwo += dy * h_last.transpose();
      gbo += dy;
      VectorXd dh = lw.wo.transpose() * dy;
      VectorXd dc = VectorXd::Zero(hidden);
      VectorXd dz(4 * hidden);
      for (std::size_t t = steps.size(); t-- > 0;) {
        const StepCache &s = steps[t];
        const VectorXd d_o = dh.cwiseProduct(s.tanh_c);
        dc += dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
        const VectorXd d_i = dc.cwiseProduct(s.g);
        const VectorXd d_g = dc.cwiseProduct(s.i);
        const VectorXd d_f = dc.cwiseProduct(s.c_prev);
        dz.segment(0, hidden) = d_i.array() * s.i.array() * (1.0 - s.i.array());
        dz.segment(hidden, hidden) = d_f.array() * s.f.array() * (1.0 - s.f.array());
        dz.segment(2 * hidden, hidden) = d_g.array() * (1.0 - s.g.array().square());
        dz.segment(3 * hidden, hidden) = d_o.array() * s.o.array() * (1.0 - s.o.array());
        gwx += dz * pair.inputs[t].transpose();
        gwh += dz * s.h_prev.transpose();
        gb += dz;
        dh = lw.wh.transpose() * dz;
        dc = dc.cwiseProduct(s.f);
      }
    }
    return nll;
  }
};

LossAndGradient elbo_loss(const BnnModel &model, const TrainingSet &batch, int mc_samples,
                          double kl_weight, std::uint64_t seed) {
  if (mc_samples < 1) {
    throw std::invalid_argument("elbo_loss: mc_samples must be >= 1");
  }
  const int n = model.weight_count();
  LossAndGradient out;
  out.grad_mean = VectorXd::Zero(n);
  out.grad_log_std = VectorXd::Zero(n);

  const VectorXd std_w = model.log_std().array().exp();
  std::mt19937_64 rng(seed);
  double nll = 0.0;
  for (int m = 0; m < mc_samples; ++m) {
    const VectorXd eps = standard_normal(rng, n);
    const VectorXd w = model.sample_weights(eps);
    VectorXd grad_w = VectorXd::Zero(n);
    Vector2d grad_noise = Vector2d::Zero();
    nll += BnnGradient::accumulate(model, w, batch, grad_w, grad_noise);
    out.grad_mean += grad_w;
    if (!model.is_collapsed()) {
      out.grad_log_std += grad_w.cwiseProduct(std_w).cwiseProduct(eps);
    }
    out.grad_log_noise += grad_noise;
  }
  const double inv_m = 1.0 / mc_samples;
  out.nll = nll * inv_m;
  out.grad_mean *= inv_m;
  out.grad_log_std *= inv_m;
  out.grad_log_noise *= inv_m;

  out.kl = model.kl_divergence();
  const double var_p = model.prior_std() * model.prior_std();
  out.grad_mean += kl_weight * model.mean() / var_p;
  out.grad_log_std +=
      kl_weight * ((2.0 * model.log_std()).array().exp() / var_p - 1.0).matrix();
  out.loss = kl_weight * out.kl + out.nll;
  if (!std::isfinite(out.loss)) {
    throw NonFiniteLoss("elbo_loss: loss is not finite");
  }
  return out;
}

TrainResult train(const BnnModel &model, const TrainingSet &data, const BnnConfig &config,
                  std::uint64_t seed) {
  if (data.pairs.empty()) {
    throw std::invalid_argument("train: empty training set");
  }
  TrainResult result{model, {}, true};
  if (config.epochs == 0) {
    return result;
  }
  BnnModel &m = result.model;
  const int n = m.weight_count();
  VectorXd vel_mean = VectorXd::Zero(n);
  VectorXd vel_log_std = VectorXd::Zero(n);
  Vector2d vel_noise = Vector2d::Zero();
  double lr = config.learning_rate;
  const std::uint64_t eval_seed = derive_seed(seed, 0xe7a1);
  const double initial =
      elbo_loss(m, data, config.train_mc_samples, config.kl_weight, eval_seed).loss;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    LossAndGradient lg;
    try {
      lg = elbo_loss(m, data, config.train_mc_samples, config.kl_weight, derive_seed(seed, epoch));
    } catch (const NonFiniteLoss &) {
      // diverged: back off the step and drop the momentum
      lr *= 0.5;
      vel_mean.setZero();
      vel_log_std.setZero();
      vel_noise.setZero();
      result.loss_curve.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    result.loss_curve.push_back(lg.loss);
    const double norm = std::sqrt(lg.grad_mean.squaredNorm() + lg.grad_log_std.squaredNorm() +
                                  lg.grad_log_noise.squaredNorm());
    const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
    vel_mean = config.momentum * vel_mean - lr * clip * lg.grad_mean;
    vel_log_std = config.momentum * vel_log_std - lr * clip * lg.grad_log_std;
    vel_noise = config.momentum * vel_noise - lr * clip * lg.grad_log_noise;
    m.mean() += vel_mean;
    m.log_std() += vel_log_std;
    m.log_noise() += vel_noise;
  }
  double final_loss = std::numeric_limits<double>::infinity();
  try {
    final_loss = elbo_loss(m, data, config.train_mc_samples, config.kl_weight, eval_seed).loss;
  } catch (const NonFiniteLoss &) {
  }
  result.converged = final_loss <= initial;
  return result;
}

TrainResult train_on_features(std::span<const DemandFeature> features, const BnnConfig &config,
                              std::uint64_t seed, const BnnModel *warm_start) {
  config.validate();
  BnnModel model = warm_start != nullptr
                       ? *warm_start
                       : BnnModel(config.history_length, config.hidden_size, config.prior_std,
                                  config.init_log_std, derive_seed(seed, 0x1417));
  model.normalization() = FeatureNormalization::fit(features);
  const TrainingSet data =
      TrainingSet::from_features(features, config.history_length, model.normalization());
  return train(model, data, config, seed);
}

// ---------------------------------------------------------------- prediction

PredictedFeature predict(const BnnModel &model, std::span<const DemandFeature> history,
                         int mc_samples, std::uint64_t seed) {
  check_history(model, history, mc_samples);
  const auto inputs = normalized_history(model, history);
  if (model.is_collapsed()) {
    const Vector2d z = model.forward(model.mean(), inputs);
    return {model.normalization().invert(z), 0.0, 0.0};
  }
  std::vector<DemandFeature> draws(static_cast<std::size_t>(mc_samples));
#pragma omp parallel for schedule(static)
  for (int m = 0; m < mc_samples; ++m) {
    draws[static_cast<std::size_t>(m)] = predictive_draw(model, inputs, derive_seed(seed, m));
  }
  return summarize(draws);
}

namespace reference {

PredictedFeature predict_serial(const BnnModel &model, std::span<const DemandFeature> history,
                                int mc_samples, std::uint64_t seed) {
  check_history(model, history, mc_samples);
  const auto inputs = normalized_history(model, history);
  if (model.is_collapsed()) {
    const Vector2d z = model.forward(model.mean(), inputs);
    return {model.normalization().invert(z), 0.0, 0.0};
  }
  std::vector<DemandFeature> draws;
  for (int m = 0; m < mc_samples; ++m) {
    draws.push_back(predictive_draw(model, inputs, derive_seed(seed, m)));
  }
  return summarize(draws);
}

}  // namespace reference

std::vector<PredictedFeature> multistep_predict(const BnnModel &model,
                                                std::span<const DemandFeature> history, int steps,
                                                int mc_samples, std::uint64_t seed) {
  if (steps < 1) {
    throw std::invalid_argument("multistep_predict: steps must be >= 1");
  }
  std::deque<DemandFeature> window(history.begin(), history.end());
  std::vector<PredictedFeature> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const std::vector<DemandFeature> h(window.begin(), window.end());
    const PredictedFeature pf = predict(model, h, mc_samples, k == 0 ? seed : derive_seed(seed, k));
    out.push_back(pf);
    window.pop_front();
    window.push_back({pf.mean_feature.mean, std::max(0.0, pf.mean_feature.variance)});
  }
  return out;
}

FittedDemandDistribution fit_distribution(const PredictedFeature &pf, double dispersion_tolerance) {
  const double mean = pf.mean_feature.mean;
  if (!(mean > 0.0)) {
    throw NonPositiveMean("fit_distribution: predicted mean must be positive");
  }
  const double ratio = pf.mean_feature.variance / mean;
  if (std::abs(ratio - 1.0) <= dispersion_tolerance) {
    return PoissonFit{mean, pf.mean_std};
  }
  return GaussianFit{mean, pf.mean_std, std::max(pf.mean_feature.variance, 0.0), pf.variance_std};
}

}  // namespace leoslice
