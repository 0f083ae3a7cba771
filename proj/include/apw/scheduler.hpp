#pragma once

// The difficulty measurer and training scheduler: per-sample losses are
// marked easy/hard against an error threshold, the hard mass drives a
// boosting-style weight-change value, and the sample-weight vector is
// updated multiplicatively and renormalized once per weighting step.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "apw/util.hpp"

namespace apw {

struct SchedulerConfig {
  double error_threshold = kLn2;  // e, in nats
  double stabilizer = 2.0;        // q
  double phase_threshold = 0.5;   // tau
  double clip_lo = 1e-4;
  double clip_hi = 1.0 - 1e-4;

  void validate() const {
    require(error_threshold > 0.0, "SchedulerConfig: error threshold must be > 0");
    require(stabilizer >= 2.0, "SchedulerConfig: stabilizer must be >= 2");
    require(phase_threshold > 0.0 && phase_threshold < 1.0,
            "SchedulerConfig: phase threshold must lie in (0, 1)");
    require(clip_lo > 0.0 && clip_lo < clip_hi && clip_hi < 1.0,
            "SchedulerConfig: clip bounds must satisfy 0 < lo < hi < 1");
  }
};

// Per-sample losses in nats; entries must be finite and nonnegative.
using LossVector = std::vector<double>;

// Difficulty labels: +1 easy, -1 hard.
using DifficultyVector = std::vector<int>;

// Probability vector over the training set: strictly positive entries
// summing to one within 1e-12.
class SampleWeights {
 public:
  static SampleWeights uniform(std::size_t n) {
    require(n > 0, "SampleWeights: empty set");
    return SampleWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  explicit SampleWeights(std::vector<double> w) : w_(std::move(w)) {
    require(!w_.empty(), "SampleWeights: empty vector");
    for (double x : w_)
      require(std::isfinite(x) && x > 0.0,
              "SampleWeights: entries must be positive and finite");
    const long double total = stable_sum(w_);
    require(std::fabs(static_cast<double>(total - 1.0L)) <= 1e-12,
            "SampleWeights: entries must sum to one");
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }

 private:
  std::vector<double> w_;
};

// One weighting step of the scheduler. Both the raw and the clipped hard
// mass are kept: the weight change is always computed from the clipped
// value, while bound checkers need the raw one to flag clipped epochs.
struct EpochUpdate {
  double rho_raw = 0.0;
  double rho_clipped = 0.0;
  double gamma = 0.0;  // 1/2 - rho_clipped
  double alpha = 0.0;
  double z = 1.0;  // normalizer of the weight update
  bool clipped = false;
};

// Easy iff loss <= e; the boundary counts as easy.
inline DifficultyVector mark_difficulty(const LossVector& losses, double e) {
  require(e > 0.0, "mark_difficulty: threshold must be positive");
  DifficultyVector beta(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    require(std::isfinite(losses[i]) && losses[i] >= 0.0,
            "mark_difficulty: losses must be finite and nonnegative");
    beta[i] = losses[i] <= e ? +1 : -1;
  }
  return beta;
}

// Total weight carried by hard samples.
inline double hard_mass(const SampleWeights& weights,
                        const DifficultyVector& beta) {
  require(weights.size() == beta.size(), "hard_mass: length mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    require(beta[i] == 1 || beta[i] == -1, "hard_mass: difficulty must be +-1");
    if (beta[i] == -1) acc += weights[i];
  }
  return static_cast<double>(acc);
}

// Weight-change value from the hard mass. With the default phase threshold
// of 1/2 the second log term is exactly zero and this is the plain
// log-odds step (1/q) log((1-rho)/rho); clipping bounds |alpha| by
// log((1-lo)/lo)/q.
inline EpochUpdate weight_change(double rho, const SchedulerConfig& config) {
  config.validate();
  require(std::isfinite(rho) && rho >= 0.0 && rho <= 1.0,
          "weight_change: hard mass must lie in [0, 1]");
  EpochUpdate u;
  u.rho_raw = rho;
  u.clipped = rho < config.clip_lo || rho > config.clip_hi;
  u.rho_clipped = std::min(std::max(rho, config.clip_lo), config.clip_hi);
  u.gamma = 0.5 - u.rho_clipped;
  const double tau = config.phase_threshold;
  u.alpha = (std::log((1.0 - u.rho_clipped) / u.rho_clipped) +
             std::log(tau / (1.0 - tau))) /
            config.stabilizer;
  return u;
}

// Multiplicative update w' = w * exp(-alpha * beta) / Z. Returns the new
// vector and the normalizer Z = sum w * exp(-alpha * beta), which also has
// the closed form (1-rho) e^{-alpha} + rho e^{alpha}.
inline std::pair<SampleWeights, double> update_weights(
    const SampleWeights& weights, const DifficultyVector& beta, double alpha) {
  require(weights.size() == beta.size(), "update_weights: length mismatch");
  require(std::isfinite(alpha), "update_weights: alpha must be finite");
  const double up = std::exp(alpha);
  const double down = std::exp(-alpha);
  std::vector<double> scaled(weights.size());
  for (std::size_t i = 0; i < beta.size(); ++i) {
    require(beta[i] == 1 || beta[i] == -1,
            "update_weights: difficulty must be +-1");
    scaled[i] = weights[i] * (beta[i] == 1 ? down : up);
  }
  const long double z = stable_sum(scaled);
  if (!std::isfinite(static_cast<double>(z)) || z <= 0.0L)
    throw std::runtime_error("update_weights: normalizer is not finite");
  for (double& x : scaled) x = static_cast<double>(x / z);
  return {SampleWeights(std::move(scaled)), static_cast<double>(z)};
}

// Reweighted objective value sum_n w_n L_n.
inline double reweighted_loss(const SampleWeights& weights,
                              const LossVector& losses) {
  require(weights.size() == losses.size(), "reweighted_loss: length mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    require(std::isfinite(losses[i]) && losses[i] >= 0.0,
            "reweighted_loss: losses must be finite and nonnegative");
    acc += static_cast<long double>(weights[i]) * losses[i];
  }
  return static_cast<double>(acc);
}

// One full weighting step: mark difficulty, measure the hard mass, derive
// the weight change and apply the multiplicative update.
inline std::pair<SampleWeights, EpochUpdate> epoch_step(
    const SampleWeights& weights, const LossVector& losses,
    const SchedulerConfig& config) {
  const DifficultyVector beta = mark_difficulty(losses, config.error_threshold);
  EpochUpdate u = weight_change(hard_mass(weights, beta), config);
  auto [next, z] = update_weights(weights, beta, u.alpha);
  u.z = z;
  return {std::move(next), u};
}

}  // namespace apw
