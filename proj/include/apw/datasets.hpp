#pragma once

// Synthetic two-cluster data with a separability certificate, uniform
// label-noise injection, seeded splits, the interpretable error-threshold
// defaults, and the dataset CSV / metadata sidecar formats.

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "apw/rng.hpp"
#include "apw/util.hpp"

#include "json.hpp"

namespace apw {

struct NoiseSpec {
  enum class Kind { none, inherent, synthetic };
  Kind kind = Kind::none;
  double rate = 0.0;

  void validate() const {
    require(rate >= 0.0 && rate < 1.0, "NoiseSpec: rate must lie in [0, 1)");
    require(kind != Kind::none || rate == 0.0, "NoiseSpec: kind none implies rate 0");
  }
};

inline std::string_view to_string(NoiseSpec::Kind kind) {
  switch (kind) {
    case NoiseSpec::Kind::none: return "none";
    case NoiseSpec::Kind::inherent: return "inherent";
    case NoiseSpec::Kind::synthetic: return "synthetic";
  }
  return "?";
}

inline NoiseSpec::Kind noise_kind_from_string(std::string_view s) {
  if (s == "none") return NoiseSpec::Kind::none;
  if (s == "inherent") return NoiseSpec::Kind::inherent;
  if (s == "synthetic") return NoiseSpec::Kind::synthetic;
  throw std::invalid_argument("unknown noise kind '" + std::string(s) + "'");
}

struct GeneratorMeta {
  std::uint64_t seed = 0;
  double std_dev = 0.0;
  std::array<double, 2> center0{0.0, 0.0};
  std::array<double, 2> center1{0.0, 0.0};
  std::size_t attempts = 0;
};

struct LabeledDataset {
  Matrix x;
  std::vector<int> y;                         // labels in [0, classes)
  std::optional<std::vector<int>> y_clean;    // pre-noise labels when noise was injected
  std::size_t classes = 2;
  NoiseSpec noise;
  std::optional<GeneratorMeta> generator;

  std::size_t size() const { return y.size(); }

  void validate() const {
    require(x.rows() == y.size(), "LabeledDataset: row/label mismatch");
    require(classes >= 2, "LabeledDataset: need at least two classes");
    for (int label : y)
      require(label >= 0 && static_cast<std::size_t>(label) < classes,
              "LabeledDataset: label out of range");
    if (y_clean) {
      require(y_clean->size() == y.size(), "LabeledDataset: clean label mismatch");
      for (int label : *y_clean)
        require(label >= 0 && static_cast<std::size_t>(label) < classes,
                "LabeledDataset: clean label out of range");
    }
  }
};

// Perceptron with bias; returns the separating vector (last component the
// bias) when one is found within the update cap, otherwise nothing.
inline std::optional<std::vector<double>> find_linear_separator(
    const Matrix& x, std::span<const int> y, std::size_t update_cap = 1000000) {
  require(x.rows() == y.size() && x.rows() > 0, "find_linear_separator: shape mismatch");
  const std::size_t d = x.cols();
  std::vector<double> w(d + 1, 0.0);
  std::size_t updates = 0;
  for (;;) {
    bool clean_pass = true;
    for (std::size_t n = 0; n < x.rows(); ++n) {
      const double sign = y[n] == 1 ? 1.0 : -1.0;
      long double margin = w[d];
      for (std::size_t c = 0; c < d; ++c)
        margin += static_cast<long double>(w[c]) * x.at(n, c);
      if (sign * static_cast<double>(margin) <= 0.0) {
        for (std::size_t c = 0; c < d; ++c) w[c] += sign * x.at(n, c);
        w[d] += sign;
        clean_pass = false;
        if (++updates >= update_cap) return std::nullopt;
      }
    }
    if (clean_pass) return w;
  }
}

inline bool separability_check(const Matrix& x, std::span<const int> y) {
  return find_linear_separator(x, y).has_value();
}

// Two Gaussian clusters with centers drawn uniformly from the given square,
// exactly n/2 samples per class, resampled until linearly separable. The
// perceptron witness is re-verified on the returned data before accepting.
inline LabeledDataset gen_gaussian_2class(std::size_t n, double std_dev,
                                          double center_lo, double center_hi,
                                          std::uint64_t seed,
                                          std::size_t max_attempts = 1000) {
  require(n >= 2 && n % 2 == 0, "gen_gaussian_2class: n must be even and >= 2");
  require(std_dev > 0.0, "gen_gaussian_2class: std must be positive");
  require(center_lo < center_hi, "gen_gaussian_2class: empty center range");
  Rng rng(splitmix64(seed + 1));
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    GeneratorMeta meta;
    meta.seed = seed;
    meta.std_dev = std_dev;
    meta.attempts = attempt;
    meta.center0 = {rng.uniform(center_lo, center_hi), rng.uniform(center_lo, center_hi)};
    meta.center1 = {rng.uniform(center_lo, center_hi), rng.uniform(center_lo, center_hi)};
    LabeledDataset ds;
    ds.x = Matrix(n, 2);
    ds.y.resize(n);
    ds.classes = 2;
    for (std::size_t i = 0; i < n; ++i) {
      const bool second = i >= n / 2;
      const auto& center = second ? meta.center1 : meta.center0;
      ds.x.at(i, 0) = center[0] + std_dev * rng.normal();
      ds.x.at(i, 1) = center[1] + std_dev * rng.normal();
      ds.y[i] = second ? 1 : 0;
    }
    const auto witness = find_linear_separator(ds.x, ds.y);
    if (!witness) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = ds.y[i] == 1 ? 1.0 : -1.0;
      const double margin =
          (*witness)[0] * ds.x.at(i, 0) + (*witness)[1] * ds.x.at(i, 1) + (*witness)[2];
      require(sign * margin > 0.0, "gen_gaussian_2class: witness failed re-verification");
    }
    ds.generator = meta;
    return ds;
  }
  throw std::runtime_error("gen_gaussian_2class: attempt cap exceeded without a separable draw");
}

// Independently replaces each label, with probability p, by a uniform draw
// from the other classes; a flipped label never equals the original.
inline std::pair<std::vector<int>, std::vector<bool>> inject_uniform_noise(
    std::span<const int> y, double p, int classes, Rng& rng) {
  require(classes >= 2, "inject_uniform_noise: need at least two classes");
  require(p >= 0.0 && p < 1.0, "inject_uniform_noise: rate must lie in [0, 1)");
  std::vector<int> noisy(y.begin(), y.end());
  std::vector<bool> flipped(y.size(), false);
  for (std::size_t i = 0; i < y.size(); ++i) {
    require(y[i] >= 0 && y[i] < classes, "inject_uniform_noise: label out of range");
    if (p == 0.0) continue;
    if (rng.uniform() < p) {
      const int offset = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(classes - 1)));
      noisy[i] = (y[i] + offset) % classes;
      flipped[i] = true;
    }
  }
  return {std::move(noisy), std::move(flipped)};
}

// Disjoint covering split with a seeded shuffle; part sizes are floors of
// the fractions with the remainder assigned to the leading parts.
inline std::vector<LabeledDataset> split(const LabeledDataset& dataset,
                                         std::span<const double> fractions,
                                         Rng& rng) {
  dataset.validate();
  require(!fractions.empty(), "split: no fractions");
  long double total = 0.0L;
  for (double f : fractions) {
    require(f > 0.0, "split: fractions must be positive");
    total += f;
  }
  require(std::fabs(static_cast<double>(total) - 1.0) <= 1e-9,
          "split: fractions must sum to one");

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::size_t> sizes(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    sizes[p] = static_cast<std::size_t>(std::floor(fractions[p] * static_cast<double>(n)));
    assigned += sizes[p];
  }
  for (std::size_t p = 0; assigned < n; ++p, ++assigned) sizes[p % sizes.size()] += 1;

  std::vector<LabeledDataset> parts;
  std::size_t cursor = 0;
  for (std::size_t size : sizes) {
    LabeledDataset part;
    part.x = Matrix(size, dataset.x.cols());
    part.y.resize(size);
    part.classes = dataset.classes;
    part.noise = dataset.noise;
    part.generator = dataset.generator;
    if (dataset.y_clean) part.y_clean = std::vector<int>(size);
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t src = order[cursor + i];
      for (std::size_t c = 0; c < dataset.x.cols(); ++c)
        part.x.at(i, c) = dataset.x.at(src, c);
      part.y[i] = dataset.y[src];
      if (dataset.y_clean) (*part.y_clean)[i] = (*dataset.y_clean)[src];
    }
    cursor += size;
    parts.push_back(std::move(part));
  }
  return parts;
}

// Interpretable error-threshold defaults: log(2) on clean data, tightened
// by log(1-p) for inherent noise and widened by it for synthetic noise.
inline double default_threshold(const NoiseSpec& noise) {
  noise.validate();
  switch (noise.kind) {
    case NoiseSpec::Kind::none:
      return kLn2;
    case NoiseSpec::Kind::inherent: {
      const double e = kLn2 + std::log(1.0 - noise.rate);
      require(e > 0.0, "default_threshold: inherent noise rate leaves no positive threshold");
      return e;
    }
    case NoiseSpec::Kind::synthetic:
      return kLn2 - std::log(1.0 - noise.rate);
  }
  throw std::invalid_argument("default_threshold: unknown noise kind");
}

// ---- dataset files ----
// CSV with header f0..f{d-1},y[,y_clean]; features rendered with
// round-trip precision so write/read is bit-exact for finite doubles.

inline void write_dataset_csv(const std::filesystem::path& path,
                              const LabeledDataset& dataset) {
  dataset.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path.string());
  for (std::size_t c = 0; c < dataset.x.cols(); ++c) out << "f" << c << ",";
  out << "y";
  if (dataset.y_clean) out << ",y_clean";
  out << "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t c = 0; c < dataset.x.cols(); ++c)
      out << format_double(dataset.x.at(i, c)) << ",";
    out << dataset.y[i];
    if (dataset.y_clean) out << "," << (*dataset.y_clean)[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_dataset_csv: empty file");
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t feature_count = 0;
  bool saw_y = false, saw_clean = false;
  for (const auto& name : header) {
    if (name == "y" && !saw_y && !saw_clean) {
      saw_y = true;
    } else if (name == "y_clean" && saw_y && !saw_clean) {
      saw_clean = true;
    } else if (!saw_y && name == "f" + std::to_string(feature_count)) {
      ++feature_count;
    } else {
      throw std::runtime_error("read_dataset_csv: unexpected column '" + name + "'");
    }
  }
  if (!saw_y) throw std::runtime_error("read_dataset_csv: missing y column");
  if (feature_count == 0) throw std::runtime_error("read_dataset_csv: no feature columns");

  std::vector<double> values;
  std::vector<int> y;
  std::vector<int> y_clean;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("read_dataset_csv: row width does not match header");
    for (std::size_t c = 0; c < feature_count; ++c)
      values.push_back(parse_double(fields[c]));
    y.push_back(static_cast<int>(parse_int(fields[feature_count])));
    if (saw_clean)
      y_clean.push_back(static_cast<int>(parse_int(fields[feature_count + 1])));
  }
  LabeledDataset ds;
  ds.x = Matrix(y.size(), feature_count);
  ds.x.data() = std::move(values);
  ds.y = std::move(y);
  if (saw_clean) ds.y_clean = std::move(y_clean);
  int max_label = 1;
  for (int label : ds.y) max_label = std::max(max_label, label);
  if (ds.y_clean)
    for (int label : *ds.y_clean) max_label = std::max(max_label, label);
  ds.classes = static_cast<std::size_t>(max_label) + 1;
  ds.validate();
  return ds;
}

inline nlohmann::json dataset_meta_json(const LabeledDataset& dataset) {
  nlohmann::json meta;
  meta["noise"] = {{"kind", std::string(to_string(dataset.noise.kind))},
                   {"rate", dataset.noise.rate}};
  if (dataset.generator) {
    meta["generator"] = {{"seed", dataset.generator->seed},
                         {"std", dataset.generator->std_dev},
                         {"center0", dataset.generator->center0},
                         {"center1", dataset.generator->center1},
                         {"attempts", dataset.generator->attempts}};
  }
  return meta;
}

inline void write_dataset_meta(const std::filesystem::path& path,
                               const LabeledDataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_dataset_meta: cannot open " + path.string());
  out << dataset_meta_json(dataset).dump(2) << "\n";
}

}  // namespace apw
