#include "fracvar/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracvar {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("fractional order must lie in (0, 1), got " + std::to_string(alpha));
  }
}

UniformGrid::UniformGrid(double a, double b, std::size_t n_nodes) : a_(a), b_(b), n_(n_nodes) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw std::invalid_argument("grid: need finite a < b");
  }
  if (n_nodes < 3) throw std::invalid_argument("grid: need at least 3 nodes");
  h_ = (b - a) / static_cast<double>(n_nodes - 1);
  if (!(h_ > 0.0)) throw std::invalid_argument("grid: degenerate spacing");
}

double UniformGrid::node(std::size_t i) const {
  if (i + 1 == n_) return b_;
  return a_ + static_cast<double>(i) * h_;
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = node(i);
  return out;
}

SampledFunction::SampledFunction(UniformGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("sampled function: " + std::to_string(values_.size()) +
                                " values for a grid of " + std::to_string(grid_.size()) + " nodes");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("sampled function: non-finite value at node " + std::to_string(i));
    }
  }
}

}  // namespace fracvar
