#pragma once

// Small shared utilities: a dense row-major matrix sized for tiny models,
// fixed-order extended-precision reductions, and locale-independent
// round-trip number formatting used by every text artifact.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace apw {

inline constexpr double kLn2 = 0.6931471805599453;

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Index-ascending accumulation in extended precision. The fixed order is
// part of the reproducibility contract, so do not replace this with a
// parallel or reassociating reduction.
inline long double stable_sum(std::span<const double> xs) {
  long double acc = 0.0L;
  for (double x : xs) acc += x;
  return acc;
}

inline long double stable_dot(std::span<const double> a,
                              std::span<const double> b) {
  require(a.size() == b.size(), "stable_dot: length mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<long double>(a[i]) * b[i];
  return acc;
}

// Shortest decimal rendering that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: malformed value '" +
                                std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_int: malformed value '" +
                                std::string(s) + "'");
  return v;
}

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace apw
