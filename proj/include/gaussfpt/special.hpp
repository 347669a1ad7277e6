#pragma once

namespace gaussfpt {

/// A(y) = exp(-y^2) - sqrt(pi) y erfc(y), with the standard erfc.
///
/// Equals E[(N - y)^+] scaled so that A(0) = 1; strictly positive for every real y.
/// For y > 8 the value is taken from the continued fraction of erfc, written as
/// exp(-y^2) K / (y + K), which has no cancellation. Underflows to 0 beyond y ~ 27.
double a_function(double y);

}  // namespace gaussfpt
