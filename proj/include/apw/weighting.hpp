#pragma once

// Epoch-level (E), iteration-level (I) and combined (EI) weighting. An
// EpochPlan fixes alpha and the base vector once per epoch from the
// full-set losses; batch steps derive the mini-batch weights and the
// contributions from which the next global vector is assembled.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "apw/scheduler.hpp"
#include "apw/util.hpp"

namespace apw {

enum class WeightingMode { E, I, EI };

inline std::string_view to_string(WeightingMode mode) {
  switch (mode) {
    case WeightingMode::E: return "E";
    case WeightingMode::I: return "I";
    case WeightingMode::EI: return "EI";
  }
  return "?";
}

struct EpochPlan {
  WeightingMode mode = WeightingMode::E;
  double alpha = 0.0;
  // E/EI: the globally updated vector for this epoch; I: the previous
  // epoch's vector, updated per batch instead.
  SampleWeights base_weights = SampleWeights::uniform(1);
  EpochUpdate update;
  std::size_t total_samples = 0;
};

struct MiniBatch {
  std::vector<std::size_t> indices;
  LossVector losses;  // per-sample losses at the current parameters
};

struct BatchWeights {
  std::vector<double> batch;           // sums to one within the batch
  std::vector<double> global_contrib;  // per-index contribution to the next global vector
};

// Computes alpha from the full-set hard mass; for E and EI the global
// update is applied immediately, for I the previous vector is carried.
inline EpochPlan prepare_epoch(const LossVector& full_losses,
                               const SampleWeights& prev_weights,
                               const SchedulerConfig& config,
                               WeightingMode mode) {
  require(full_losses.size() == prev_weights.size(),
          "prepare_epoch: losses must cover the full training set");
  const DifficultyVector beta =
      mark_difficulty(full_losses, config.error_threshold);
  EpochUpdate update = weight_change(hard_mass(prev_weights, beta), config);
  EpochPlan plan;
  plan.mode = mode;
  plan.alpha = update.alpha;
  plan.total_samples = prev_weights.size();
  if (mode == WeightingMode::I) {
    // The normalizer the epoch-level update would have; recorded for
    // diagnostics even though the global update is deferred to batches.
    update.z = (1.0 - update.rho_raw) * std::exp(-update.alpha) +
               update.rho_raw * std::exp(update.alpha);
    plan.base_weights = prev_weights;
  } else {
    auto [updated, z] = update_weights(prev_weights, beta, update.alpha);
    update.z = z;
    plan.base_weights = std::move(updated);
  }
  plan.update = update;
  return plan;
}

// E: restrict the epoch vector to the batch and renormalize (the global
// vector is untouched). I/EI: re-mark difficulty from the batch losses,
// apply the multiplicative update to the base entries, normalize within
// the batch, and scale by |batch|/N for the global contribution.
inline BatchWeights batch_step_weights(const EpochPlan& plan,
                                       const MiniBatch& batch, double e) {
  require(!batch.indices.empty(), "batch_step_weights: empty batch");
  require(batch.indices.size() == batch.losses.size(),
          "batch_step_weights: index/loss length mismatch");
  const std::size_t b = batch.indices.size();
  BatchWeights out;
  out.batch.resize(b);
  out.global_contrib.resize(b);

  std::vector<double> raw(b);
  if (plan.mode == WeightingMode::E) {
    for (std::size_t i = 0; i < b; ++i) {
      require(batch.indices[i] < plan.total_samples,
              "batch_step_weights: index out of range");
      raw[i] = plan.base_weights[batch.indices[i]];
      out.global_contrib[i] = raw[i];
    }
    const long double total = stable_sum(raw);
    for (std::size_t i = 0; i < b; ++i)
      out.batch[i] = static_cast<double>(raw[i] / total);
    return out;
  }

  const DifficultyVector beta = mark_difficulty(batch.losses, e);
  const double up = std::exp(plan.alpha);
  const double down = std::exp(-plan.alpha);
  for (std::size_t i = 0; i < b; ++i) {
    require(batch.indices[i] < plan.total_samples,
            "batch_step_weights: index out of range");
    raw[i] = plan.base_weights[batch.indices[i]] * (beta[i] == 1 ? down : up);
  }
  const long double total = stable_sum(raw);
  require(total > 0.0L, "batch_step_weights: zero batch mass");
  const double scale =
      static_cast<double>(b) / static_cast<double>(plan.total_samples);
  for (std::size_t i = 0; i < b; ++i) {
    out.batch[i] = static_cast<double>(raw[i] / total);
    out.global_contrib[i] = scale * out.batch[i];
  }
  return out;
}

// Gathers the per-index contributions of one epoch; finalize_epoch demands
// that every index was visited exactly once. Contributions are held in
// extended precision until the global renormalization.
class EpochCollector {
 public:
  explicit EpochCollector(std::size_t n)
      : contrib_(n, 0.0L), covered_(n, false) {}

  void record(const MiniBatch& batch, const BatchWeights& weights) {
    require(batch.indices.size() == weights.global_contrib.size(),
            "EpochCollector: contribution length mismatch");
    for (std::size_t i = 0; i < batch.indices.size(); ++i) {
      const std::size_t idx = batch.indices[i];
      require(idx < covered_.size(), "EpochCollector: index out of range");
      if (covered_[idx])
        throw std::invalid_argument("EpochCollector: index visited twice");
      covered_[idx] = true;
      contrib_[idx] = weights.global_contrib[i];
    }
  }

  bool complete() const {
    for (bool c : covered_)
      if (!c) return false;
    return true;
  }

  std::span<const long double> contributions() const { return contrib_; }

 private:
  std::vector<long double> contrib_;
  std::vector<bool> covered_;
};

// E: the epoch vector passes through unchanged. I/EI: the collected
// contributions are renormalized into the next global vector; an index
// never visited is a coverage error.
inline SampleWeights finalize_epoch(const EpochPlan& plan,
                                    const EpochCollector& collected) {
  if (plan.mode == WeightingMode::E) return plan.base_weights;
  if (!collected.complete())
    throw std::invalid_argument("finalize_epoch: epoch did not cover every sample");
  const std::span<const long double> contrib = collected.contributions();
  require(contrib.size() == plan.total_samples,
          "finalize_epoch: collector size mismatch");
  long double total = 0.0L;
  for (long double c : contrib) total += c;
  require(total > 0.0L, "finalize_epoch: zero total mass");
  std::vector<double> w(contrib.size());
  for (std::size_t i = 0; i < contrib.size(); ++i)
    w[i] = static_cast<double>(contrib[i] / total);
  return SampleWeights(std::move(w));
}

}  // namespace apw
