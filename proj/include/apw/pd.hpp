#pragma once

// Phase-transition detection on flattened parameter checkpoints: averaged
// cosine dissimilarity against all earlier checkpoints peaks where the
// optimization direction changes, and the mean training loss at that point
// becomes the error-threshold estimate.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "apw/util.hpp"

namespace apw {

struct CheckpointSeries {
  std::vector<std::vector<double>> vectors;   // timestamps 1..T
  std::vector<double> loss_history;           // mean per-sample loss at each checkpoint

  std::size_t length() const { return vectors.size(); }

  void validate() const {
    require(vectors.size() >= 2, "CheckpointSeries: need at least two checkpoints");
    const std::size_t dim = vectors.front().size();
    require(dim > 0, "CheckpointSeries: empty parameter vectors");
    for (const auto& v : vectors) {
      require(v.size() == dim, "CheckpointSeries: inconsistent dimensions");
      long double norm = 0.0L;
      for (double x : v) norm += static_cast<long double>(x) * x;
      require(norm > 0.0L, "CheckpointSeries: zero-norm checkpoint");
    }
  }
};

// 1 - <u,v>/(|u||v|), in [0, 2]; symmetric and scale invariant.
inline double cosine_dissimilarity(std::span<const double> u,
                                   std::span<const double> v) {
  require(u.size() == v.size() && !u.empty(),
          "cosine_dissimilarity: dimension mismatch");
  long double dot = 0.0L, nu = 0.0L, nv = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  require(nu > 0.0L && nv > 0.0L, "cosine_dissimilarity: zero-norm input");
  long double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  if (c > 1.0L) c = 1.0L;
  if (c < -1.0L) c = -1.0L;
  return static_cast<double>(1.0L - c);
}

// d^(t1) = mean over t0 < t1 of d(t0, t1), for t1 = 2..T (so entry i of
// the result belongs to t1 = i + 2).
inline std::vector<double> pd_profile(const CheckpointSeries& series) {
  series.validate();
  const std::size_t t_count = series.length();
  std::vector<double> profile(t_count - 1);
  for (std::size_t t1 = 2; t1 <= t_count; ++t1) {
    long double acc = 0.0L;
    for (std::size_t t0 = 1; t0 < t1; ++t0)
      acc += cosine_dissimilarity(series.vectors[t0 - 1], series.vectors[t1 - 1]);
    profile[t1 - 2] = static_cast<double>(acc / static_cast<long double>(t1 - 1));
  }
  return profile;
}

// Smallest t1 in [2, T] attaining the profile maximum.
inline std::size_t detect_transition(const CheckpointSeries& series) {
  const std::vector<double> profile = pd_profile(series);
  std::size_t best = 0;
  for (std::size_t i = 1; i < profile.size(); ++i)
    if (profile[i] > profile[best]) best = i;
  return best + 2;
}

// Mean training loss at the detected transition checkpoint.
inline double threshold_from_transition(const CheckpointSeries& series) {
  require(series.loss_history.size() == series.length(),
          "threshold_from_transition: loss history does not match checkpoints");
  const std::size_t t_star = detect_transition(series);
  return series.loss_history[t_star - 1];
}

// ---- checkpoint file format ----
// Header: two little-endian 64-bit unsigned integers (dimension, T), then
// T parameter vectors of raw little-endian IEEE-754 doubles.

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian; big-endian hosts need byte swaps");

inline void write_checkpoint_file(const std::filesystem::path& path,
                                  const std::vector<std::vector<double>>& vectors) {
  require(!vectors.empty(), "write_checkpoint_file: no checkpoints");
  const std::uint64_t dim = vectors.front().size();
  for (const auto& v : vectors)
    require(v.size() == dim, "write_checkpoint_file: inconsistent dimensions");
  const std::uint64_t t_count = vectors.size();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_checkpoint_file: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&t_count), sizeof(t_count));
  for (const auto& v : vectors)
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_checkpoint_file: write failed");
}

inline std::vector<std::vector<double>> read_checkpoint_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_checkpoint_file: cannot open " + path.string());
  std::uint64_t dim = 0, t_count = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&t_count), sizeof(t_count));
  if (!in || dim == 0 || t_count == 0)
    throw std::runtime_error("read_checkpoint_file: malformed header");
  std::vector<std::vector<double>> vectors(t_count, std::vector<double>(dim));
  for (auto& v : vectors) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) throw std::runtime_error("read_checkpoint_file: truncated file");
  }
  return vectors;
}

}  // namespace apw
