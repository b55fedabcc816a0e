#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "wakeplan/dataset.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/grid.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 64;
  int max_epochs = 50;
  int patience = 10;  // 0 disables early stopping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (batch_size < 1 || max_epochs < 1) throw ConfigError("train: batch_size and max_epochs must be >= 1");
    if (patience < 0 || patience > max_epochs) throw ConfigError("train: patience must lie in [0, max_epochs]");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0 && weight_decay >= 0.0))
      throw ConfigError("train: invalid Adam constants");
  }
};

// 8 -> 128 -> 256 -> 390 regressor, ReLU on the two hidden layers, linear output.
struct MlpModel {
  static constexpr int kIn = static_cast<int>(kInputDim);
  static constexpr int kHidden1 = 128;
  static constexpr int kHidden2 = 256;
  static constexpr int kOut = static_cast<int>(kOutputDim);

  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(kHidden1, kIn);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(kHidden1);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(kHidden2, kHidden1);
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(kHidden2);
  Eigen::MatrixXd w3 = Eigen::MatrixXd::Zero(kOut, kHidden2);
  Eigen::VectorXd b3 = Eigen::VectorXd::Zero(kOut);
  NormStats norm;
  Variant variant = Variant::wake_informed;

  void check() const {
    if (w1.rows() != kHidden1 || w1.cols() != kIn || b1.size() != kHidden1 || w2.rows() != kHidden2 ||
        w2.cols() != kHidden1 || b2.size() != kHidden2 || w3.rows() != kOut || w3.cols() != kHidden2 ||
        b3.size() != kOut)
      throw ConfigError("mlp: parameter shapes do not match 8-128-256-390");
    if (!w1.allFinite() || !w2.allFinite() || !w3.allFinite() || !b1.allFinite() || !b2.allFinite() ||
        !b3.allFinite())
      throw ConfigError("mlp: non-finite parameter");
  }

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 && a.w3 == b.w3 && a.b3 == b.b3 &&
           a.norm == b.norm && a.variant == b.variant;
  }
};

// Gradient (or Adam moment) blocks with the same shapes as the model.
struct Gradients {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static Gradients zeros_like(const MlpModel& m) {
    return {Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols()), Eigen::MatrixXd::Zero(m.w2.rows(), m.w2.cols()),
            Eigen::MatrixXd::Zero(m.w3.rows(), m.w3.cols()), Eigen::VectorXd::Zero(m.b1.size()),
            Eigen::VectorXd::Zero(m.b2.size()),             Eigen::VectorXd::Zero(m.b3.size())};
  }
};

namespace detail {
inline void xavier_fill(Eigen::MatrixXd& w, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = (2.0 * util::uniform01(rng) - 1.0) * bound;
}
}  // namespace detail

// Glorot-uniform weights, zero biases.
inline MlpModel init_xavier(std::uint64_t seed) {
  MlpModel m;
  Rng rng(util::derive_seed(seed, 0x58415649ULL));
  detail::xavier_fill(m.w1, rng);
  detail::xavier_fill(m.w2, rng);
  detail::xavier_fill(m.w3, rng);
  return m;
}

// Forward pass on a batch (one column per sample); keeps activations for backprop.
struct Activations {
  Eigen::MatrixXd z1, a1, z2, a2, out;
};

inline Activations forward_batch(const MlpModel& m, const Eigen::MatrixXd& x) {
  Activations a;
  a.z1 = (m.w1 * x).colwise() + m.b1;
  a.a1 = a.z1.cwiseMax(0.0);
  a.z2 = (m.w2 * a.a1).colwise() + m.b2;
  a.a2 = a.z2.cwiseMax(0.0);
  a.out = (m.w3 * a.a2).colwise() + m.b3;
  return a;
}

// Single normalized input -> normalized 390-vector.
inline Eigen::VectorXd forward(const MlpModel& m, std::span<const double, kInputDim> input) {
  for (double v : input)
    if (!std::isfinite(v)) throw InputError("mlp forward: non-finite input");
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), MlpModel::kIn);
  const Eigen::VectorXd h1 = (m.w1 * x + m.b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (m.w2 * h1 + m.b2).cwiseMax(0.0);
  return m.w3 * h2 + m.b3;
}

inline double masked_mse(std::span<const double> pred, std::span<const double> target, std::span<const double> mask) {
  if (pred.size() != target.size() || pred.size() != mask.size())
    throw ContractError("masked_mse: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    num += mask[i] * d * d;
    den += mask[i];
  }
  if (den == 0.0) throw UndefinedLossError("masked_mse: mask has no active entries");
  return num / den;
}

struct Batch {
  Eigen::MatrixXd x;  // 8 x B
  Eigen::MatrixXd y;  // 390 x B
  Eigen::MatrixXd m;  // 390 x B
};

inline Batch make_batch(const std::vector<TrainingSample>& samples, std::span<const std::size_t> idx) {
  Batch b{Eigen::MatrixXd(MlpModel::kIn, static_cast<Eigen::Index>(idx.size())),
          Eigen::MatrixXd(MlpModel::kOut, static_cast<Eigen::Index>(idx.size())),
          Eigen::MatrixXd(MlpModel::kOut, static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto& s = samples[idx[c]];
    const auto col = static_cast<Eigen::Index>(c);
    b.x.col(col) = Eigen::Map<const Eigen::VectorXd>(s.input.data(), MlpModel::kIn);
    b.y.col(col) = Eigen::Map<const Eigen::VectorXd>(s.target.data(), MlpModel::kOut);
    b.m.col(col) = Eigen::Map<const Eigen::VectorXd>(s.mask.data(), MlpModel::kOut);
  }
  return b;
}

inline Batch make_batch(const std::vector<TrainingSample>& samples) {
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return make_batch(samples, idx);
}

// Masked MSE pooled over every active entry of the batch, so a sample with an
// all-zero mask contributes nothing.
inline double batch_loss(const MlpModel& model, const Batch& b) {
  const double den = b.m.sum();
  if (den == 0.0) throw UndefinedLossError("batch loss: mask has no active entries");
  const Activations a = forward_batch(model, b.x);
  return (b.m.array() * (a.out - b.y).array().square()).sum() / den;
}

struct LossAndGrad {
  double loss = 0.0;
  Gradients grad;
};

inline LossAndGrad backward(const MlpModel& model, const Batch& b) {
  const double den = b.m.sum();
  if (den == 0.0) throw UndefinedLossError("backward: mask has no active entries");
  const Activations a = forward_batch(model, b.x);
  const Eigen::MatrixXd diff = a.out - b.y;
  LossAndGrad out;
  out.loss = (b.m.array() * diff.array().square()).sum() / den;

  const Eigen::MatrixXd g3 = (2.0 / den) * (b.m.array() * diff.array()).matrix();
  out.grad.w3 = g3 * a.a2.transpose();
  out.grad.b3 = g3.rowwise().sum();
  const Eigen::MatrixXd g2 = ((model.w3.transpose() * g3).array() * (a.z2.array() > 0.0).cast<double>()).matrix();
  out.grad.w2 = g2 * a.a1.transpose();
  out.grad.b2 = g2.rowwise().sum();
  const Eigen::MatrixXd g1 = ((model.w2.transpose() * g2).array() * (a.z1.array() > 0.0).cast<double>()).matrix();
  out.grad.w1 = g1 * b.x.transpose();
  out.grad.b1 = g1.rowwise().sum();
  return out;
}

struct AdamState {
  Gradients m;
  Gradients v;
  long t = 0;

  static AdamState fresh(const MlpModel& model) {
    return {Gradients::zeros_like(model), Gradients::zeros_like(model), 0};
  }
};

namespace detail {
template <typename P, typename G>
void adam_block(P& param, const G& grad, G& m, G& v, double bc1, double bc2, const TrainConfig& cfg) {
  G g = grad;
  if (cfg.weight_decay != 0.0) g += cfg.weight_decay * param;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  param.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}
}  // namespace detail

// Bias-corrected Adam update of every parameter block.
inline void adam_step(MlpModel& model, const Gradients& grad, AdamState& st, const TrainConfig& cfg) {
  ++st.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  detail::adam_block(model.w1, grad.w1, st.m.w1, st.v.w1, bc1, bc2, cfg);
  detail::adam_block(model.b1, grad.b1, st.m.b1, st.v.b1, bc1, bc2, cfg);
  detail::adam_block(model.w2, grad.w2, st.m.w2, st.v.w2, bc1, bc2, cfg);
  detail::adam_block(model.b2, grad.b2, st.m.b2, st.v.b2, bc1, bc2, cfg);
  detail::adam_block(model.w3, grad.w3, st.m.w3, st.v.w3, bc1, bc2, cfg);
  detail::adam_block(model.b3, grad.b3, st.m.b3, st.v.b3, bc1, bc2, cfg);
}

// Stops once the validation loss has gone `patience` epochs without improving.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Records one epoch's validation loss; returns true when training should stop.
  bool update(double val_loss) {
    ++epoch_;
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch_;
      stale_ = 0;
      return false;
    }
    ++stale_;
    return patience_ > 0 && stale_ >= patience_;
  }

  bool improved_last() const { return best_epoch_ == epoch_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct TrainReport {
  std::vector<double> train_loss;  // full-split masked MSE after each epoch
  std::vector<double> val_loss;
  int stopped_epoch = 0;
  int best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
};

// Mini-batch Adam on normalized samples. Returns the parameters from the epoch
// with the lowest validation loss.
inline std::pair<MlpModel, TrainReport> train(const std::vector<TrainingSample>& train_set,
                                              const std::vector<TrainingSample>& val_set, const TrainConfig& cfg,
                                              const NormStats& norm, Variant variant) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) throw ConfigError("train: empty training or validation split");
  const util::Stopwatch clock;
  MlpModel model = init_xavier(cfg.seed);
  model.norm = norm;
  model.variant = variant;
  MlpModel best = model;
  AdamState adam = AdamState::fresh(model);
  EarlyStopper stopper(cfg.patience);
  TrainReport report;

  const Batch full_train = make_batch(train_set);
  const Batch full_val = make_batch(val_set);
  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(util::derive_seed(cfg.seed, 0x45504f4348ULL, static_cast<std::uint64_t>(epoch)));
    util::shuffle(order, rng);
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      const Batch b = make_batch(train_set, std::span<const std::size_t>(order.data() + lo, hi - lo));
      if (b.m.sum() == 0.0) continue;
      const auto lg = backward(model, b);
      adam_step(model, lg.grad, adam, cfg);
    }
    report.train_loss.push_back(batch_loss(model, full_train));
    const double val = batch_loss(model, full_val);
    report.val_loss.push_back(val);
    report.stopped_epoch = epoch;
    const bool stop = stopper.update(val);
    if (stopper.improved_last()) best = model;
    if (stop) break;
  }
  report.best_val = stopper.best();
  report.best_epoch = stopper.best_epoch();
  report.wall_time = clock.seconds();
  return {std::move(best), std::move(report)};
}

struct Inference {
  std::vector<Vec3> waypoints;  // physical meters
  double wall_time = 0.0;       // s, median of the timed repeats
};

// Normalize -> forward -> denormalize, then truncate at the first waypoint
// within one grid spacing of the goal.
inline Inference infer_path(const MlpModel& model, const Vec3& start, const Vec3& goal, const ScenarioParams& sc,
                            double spacing, int repeats = 5) {
  Inference out;
  std::vector<double> y;
  std::vector<double> times;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const util::Stopwatch clock;
    const auto z = normalize_input(make_input(start, goal, sc), model.norm);
    const Eigen::VectorXd o = forward(model, z);
    y = denormalize_output(std::span<const double>(o.data(), static_cast<std::size_t>(o.size())), model.norm);
    times.push_back(clock.seconds());
  }
  out.wall_time = util::median(times);
  for (std::size_t i = 0; i < kMaxWaypoints; ++i) {
    const Vec3 p{y[3 * i], y[3 * i + 1], y[3 * i + 2]};
    out.waypoints.push_back(p);
    const double d = std::sqrt((p[0] - goal[0]) * (p[0] - goal[0]) + (p[1] - goal[1]) * (p[1] - goal[1]) +
                               (p[2] - goal[2]) * (p[2] - goal[2]));
    if (d <= spacing) break;
  }
  return out;
}

// Grid path for a predicted trajectory: the true start, each waypoint snapped
// to its nearest node, then the goal, joined by 26-connected line segments.
// Consecutive duplicates are dropped; revisits are kept.
inline std::vector<GridNode> waypoints_to_nodes(const std::vector<Vec3>& waypoints, const GridNode& start,
                                                const GridNode& goal, const GridSpec& spec) {
  std::vector<GridNode> anchors{start};
  for (const auto& w : waypoints) anchors.push_back(nearest_node(spec, w));
  anchors.push_back(goal);
  std::vector<GridNode> out{start};
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const GridNode a = out.back();
    const GridNode b = anchors[i];
    const int steps = chebyshev(a, b);
    for (int k = 1; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      const GridNode n{a.ix + static_cast<int>(std::lround(t * (b.ix - a.ix))),
                       a.iy + static_cast<int>(std::lround(t * (b.iy - a.iy))),
                       a.iz + static_cast<int>(std::lround(t * (b.iz - a.iz)))};
      if (!(n == out.back())) out.push_back(n);
    }
  }
  return out;
}

}  // namespace wakeplan
