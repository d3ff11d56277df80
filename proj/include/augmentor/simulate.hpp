#pragma once

#include <cstdint>
#include <initializer_list>

#include "augmentor/data_matrix.hpp"

namespace augmentor {

/// Rows of i.i.d. N(0, I_p) predictors with y = X beta + noise_sd * eps,
/// response last.
DataMatrix simulate_linear(Index n, const Vector& beta, double noise_sd, std::uint64_t seed);

/// Bernoulli responses with P(y = 1 | x) = 1 / (1 + exp(-x' beta)).
DataMatrix simulate_logistic(Index n, const Vector& beta, std::uint64_t seed);

/// beta with the given leading entries and zeros up to length p.
Vector padded_beta(std::initializer_list<double> head, Index p);

}  // namespace augmentor
