#pragma once

// The two weight-driven variants: curriculum sampling that grows the
// training subset by weight-proportional draws, and mixup with the
// interpolation coefficient replaced by the normalized pair weights.

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "apw/rng.hpp"
#include "apw/scheduler.hpp"
#include "apw/util.hpp"
#include "apw/weighting.hpp"

namespace apw {

// ---- curriculum sampling ----

struct SamplerState {
  std::vector<bool> included;
  std::size_t included_count = 0;
  std::size_t draw_size = 0;  // floor(r_s * N)
  bool done = false;

  std::size_t remainder() const { return included.size() - included_count; }
};

inline SamplerState make_sampler(std::size_t n, double sampling_fraction = 0.05) {
  require(n > 0, "make_sampler: empty training set");
  require(sampling_fraction > 0.0 && sampling_fraction < 1.0,
          "make_sampler: fraction must lie in (0, 1)");
  SamplerState st;
  st.included.assign(n, false);
  st.draw_size = static_cast<std::size_t>(
      std::floor(sampling_fraction * static_cast<double>(n)));
  require(st.draw_size >= 1, "make_sampler: fraction draws no samples");
  st.done = st.remainder() < st.draw_size;
  return st;
}

// One sampling round: floor(r_s*N) indices are drawn without replacement
// from the uncovered remainder with probabilities proportional to the
// current weights, then added to the covered set. Re-drawing an already
// covered index would be a no-op under the set union, so the draw is
// restricted to the remainder with renormalized weights.
inline void sapw_round(const SampleWeights& weights, SamplerState& state,
                       Rng& rng) {
  require(!state.done, "sapw_round: sampling already complete");
  require(weights.size() == state.included.size(),
          "sapw_round: weight length mismatch");
  std::vector<std::size_t> pool;
  std::vector<double> mass;
  pool.reserve(state.remainder());
  for (std::size_t i = 0; i < state.included.size(); ++i) {
    if (!state.included[i]) {
      pool.push_back(i);
      mass.push_back(weights[i]);
    }
  }
  for (std::size_t draw = 0; draw < state.draw_size; ++draw) {
    long double total = 0.0L;
    for (double m : mass) total += m;
    if (!(total > 0.0L))
      throw std::runtime_error("sapw_round: remainder carries no weight");
    const long double u = static_cast<long double>(rng.uniform()) * total;
    long double acc = 0.0L;
    std::size_t pick = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      acc += mass[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    state.included[pool[pick]] = true;
    ++state.included_count;
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    mass.erase(mass.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  state.done = state.remainder() < state.draw_size;
}

// Training mode once sampling has covered the set: plain average loss or
// one of the three weighting approaches.
enum class PostSamplingMode { Average, E, I, EI };

inline PostSamplingMode sapw_mode_after_completion(std::string_view choice) {
  if (choice == "A" || choice == "a") return PostSamplingMode::Average;
  if (choice == "E" || choice == "e") return PostSamplingMode::E;
  if (choice == "I" || choice == "i") return PostSamplingMode::I;
  if (choice == "EI" || choice == "ei") return PostSamplingMode::EI;
  throw std::invalid_argument("sapw_mode_after_completion: unknown mode '" +
                              std::string(choice) + "'");
}

// ---- weighted mixup ----

struct MixCoefficients {
  double lambda_i = 0.5;
  double lambda_j = 0.5;
};

// Normalized pair weights; invariant under joint positive scaling.
inline MixCoefficients mapw_coefficients(double w_i, double w_j) {
  require(std::isfinite(w_i) && w_i > 0.0 && std::isfinite(w_j) && w_j > 0.0,
          "mapw_coefficients: weights must be positive");
  MixCoefficients c;
  c.lambda_i = w_i / (w_i + w_j);
  c.lambda_j = 1.0 - c.lambda_i;
  return c;
}

struct MixPair {
  std::size_t i = 0;
  std::size_t j = 0;
  MixCoefficients lambda;
};

// Cross-entropy of a soft target against a prediction, -sum t log p.
inline double cross_entropy(std::span<const double> target,
                            std::span<const double> pred) {
  require(target.size() == pred.size(), "cross_entropy: length mismatch");
  long double acc = 0.0L;
  for (std::size_t c = 0; c < target.size(); ++c) {
    if (target[c] == 0.0) continue;
    require(pred[c] > 0.0, "cross_entropy: prediction mass missing on target class");
    acc -= static_cast<long double>(target[c]) * std::log(pred[c]);
  }
  return static_cast<double>(acc);
}

// Pairwise-weighted cross-entropy of one mixed example. By linearity of
// the cross-entropy in the target this equals the CE of the mixed soft
// label against the prediction.
inline double mixup_loss(std::span<const double> pred, std::size_t class_i,
                         std::size_t class_j, const MixCoefficients& pair) {
  require(class_i < pred.size() && class_j < pred.size(),
          "mixup_loss: class index out of range");
  long double total = 0.0L;
  for (double p : pred) {
    require(std::isfinite(p) && p >= 0.0, "mixup_loss: prediction is not a distribution");
    total += p;
  }
  require(std::fabs(static_cast<double>(total) - 1.0) <= 1e-9,
          "mixup_loss: prediction is not a distribution");
  require(pred[class_i] > 0.0 && pred[class_j] > 0.0,
          "mixup_loss: zero predicted probability on a target class");
  return pair.lambda_i * -std::log(pred[class_i]) +
         pair.lambda_j * -std::log(pred[class_j]);
}

// Baseline mixing coefficient, Beta(alpha_mix, alpha_mix).
inline double standard_mixup_lambda(double alpha_mix, Rng& rng) {
  require(alpha_mix > 0.0, "standard_mixup_lambda: alpha must be positive");
  return rng.beta(alpha_mix, alpha_mix);
}

// Pairs a batch with a seeded permutation of itself; lambdas come from the
// batch-normalized weights. The same lambda pair mixes inputs and losses.
inline std::vector<MixPair> mixup_pairing(std::span<const double> batch_weights,
                                          Rng& rng) {
  require(!batch_weights.empty(), "mixup_pairing: empty batch");
  std::vector<std::size_t> partner(batch_weights.size());
  for (std::size_t i = 0; i < partner.size(); ++i) partner[i] = i;
  rng.shuffle(partner);
  std::vector<MixPair> pairs(batch_weights.size());
  for (std::size_t i = 0; i < partner.size(); ++i) {
    pairs[i].i = i;
    pairs[i].j = partner[i];
    pairs[i].lambda =
        mapw_coefficients(batch_weights[i], batch_weights[partner[i]]);
  }
  return pairs;
}

}  // namespace apw
