#pragma once

#include "folio/types.hpp"

namespace folio {

/// Transaction remainder factor mu in (0, 1] for rebalancing `from` -> `to` at
/// commission rate c (same rate for purchases and sales). mu is the fixed point of
///
///     mu = (1 - c*from_0 - (2c - c^2) * sum_{i>=1} max(from_i - mu*to_i, 0)) / (1 - c*to_0)
///
/// iterated from mu_0 = 1 - c * sum_{i>=1} |from_i - to_i| until successive iterates
/// differ by < 1e-12 (at most 10000 iterations, else Error{NoConvergence}).
double transaction_factor(const WeightVector& from, const WeightVector& to, double c);

/// Independent bisection solve of the same equation on [1 - 2c, 1] to 1e-14,
/// widening once to [0, 1] if the bracket has no sign change.
double transaction_factor_oracle(const WeightVector& from, const WeightVector& to, double c);

}  // namespace folio
