#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trapscope {

/// A control f in L2([0,T]; R), constant on each of M equal segments:
/// f(t) = values[j] for t in [jT/M, (j+1)T/M).
class PiecewiseControl {
 public:
  /// Throws DomainError unless T > 0, M >= 1 and every value is finite.
  PiecewiseControl(double horizon, std::vector<double> values);

  static PiecewiseControl zero(double horizon, int segments);
  static PiecewiseControl constant(double horizon, int segments, double value);
  /// values[j] = fn(midpoint of segment j).
  static PiecewiseControl sampled(double horizon, int segments, const std::function<double(double)>& fn);

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] int segments() const noexcept { return static_cast<int>(values_.size()); }
  [[nodiscard]] double step() const noexcept { return horizon_ / static_cast<double>(values_.size()); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double value(int segment) const { return values_.at(segment); }
  [[nodiscard]] double segment_start(int segment) const noexcept { return segment * step(); }

  /// t * f.
  [[nodiscard]] PiecewiseControl scaled(double factor) const;
  /// f + c.
  [[nodiscard]] PiecewiseControl shifted(double offset) const;
  /// Copy with one segment replaced.
  [[nodiscard]] PiecewiseControl with_value(int segment, double value) const;

  friend bool operator==(const PiecewiseControl&, const PiecewiseControl&) = default;

 private:
  double horizon_;
  std::vector<double> values_;
};

/// Throws GridMismatch unless f and g share T (to 1e-12 relative) and M.
void require_same_grid(const PiecewiseControl& f, const PiecewiseControl& g);

double integral(const PiecewiseControl& f);
double inner(const PiecewiseControl& f, const PiecewiseControl& g);
double norm(const PiecewiseControl& f);

/// Orthogonal projection onto the mean-zero subspace: f - (1/T) * integral(f).
PiecewiseControl project_mean_zero(const PiecewiseControl& f);

/// Values drawn i.i.d. uniform on [-amplitude, amplitude] from a mt19937_64
/// stream seeded with `seed`; the 53 high bits of each draw become the unit
/// variate, so the output is identical on every conforming platform. With
/// `mean_zero` the draw is projected and rescaled to norm amplitude * sqrt(T).
PiecewiseControl random_direction(std::uint64_t seed, int segments, double horizon, bool mean_zero,
                                  double amplitude);

/// Portable uniform [0, 1) variates from mt19937_64.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

/// Text form: "T <real>", "M <integer>", then M lines with one real each.
/// Reals are written with 17 significant digits.
std::string write_control(const PiecewiseControl& f);
/// Strict parser; errors carry 1-based line numbers.
PiecewiseControl parse_control(std::string_view text);

PiecewiseControl read_control_file(const std::filesystem::path& path);
void write_control_file(const std::filesystem::path& path, const PiecewiseControl& f);

/// printf("%.17g").
std::string format_real(double x);

}  // namespace trapscope
