#pragma once

namespace fracvar {

/// Gamma function for real arguments.
///
/// Lanczos approximation (g = 7, nine coefficients) for z >= 1/2 and the
/// reflection formula below that. Relative error stays under 1e-13 on
/// (0, 30]. Throws std::domain_error for z <= 0.
double gamma(double z);

}  // namespace fracvar
