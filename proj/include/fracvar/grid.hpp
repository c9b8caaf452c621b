#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracvar {

/// Order of the fractional operators, restricted to the open interval (0, 1).
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha);

  double value() const { return alpha_; }

 private:
  double alpha_;
};

/// n equally spaced nodes a = t_0 < t_1 < ... < t_{n-1} = b.
class UniformGrid {
 public:
  UniformGrid(double a, double b, std::size_t n_nodes);

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t size() const { return n_; }
  double step() const { return h_; }
  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  /// Same node count mapped onto [a, new_b].
  UniformGrid rescaled(double new_b) const { return UniformGrid(a_, new_b, n_); }

  bool operator==(const UniformGrid&) const = default;

 private:
  double a_;
  double b_;
  std::size_t n_;
  double h_;
};

/// Values of a real function at the nodes of a uniform grid.
class SampledFunction {
 public:
  SampledFunction(UniformGrid grid, std::vector<double> values);

  template <typename F>
  static SampledFunction from(const UniformGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return SampledFunction(grid, std::move(v));
  }

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  UniformGrid grid_;
  std::vector<double> values_;
};

}  // namespace fracvar
