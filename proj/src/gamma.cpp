#include "fracvar/gamma.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fracvar {

namespace {

constexpr double kLanczosG = 7.0;
constexpr double kLanczosCoeffs[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos(double z) {
  z -= 1.0;
  double series = kLanczosCoeffs[0];
  for (int i = 1; i < 9; ++i) series += kLanczosCoeffs[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  // split the power so large arguments do not overflow before exp(-t)
  const double half_power = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_power * (half_power * std::exp(-t)) * series;
}

}  // namespace

double gamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::domain_error("gamma: argument must be positive and finite, got " + std::to_string(z));
  }
  if (z < 0.5) {
    // reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::numbers::pi / (std::sin(std::numbers::pi * z) * lanczos(1.0 - z));
  }
  return lanczos(z);
}

}  // namespace fracvar
