#include "augmentor/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

Matrix gaussian_design(Index n, Index p, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (p < 1) throw std::invalid_argument("beta must not be empty");
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

DataMatrix simulate_linear(Index n, const Vector& beta, double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  Rng rng(seed);
  const Matrix x = gaussian_design(n, beta.size(), rng);
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += noise_sd * rng.normal();
  return DataMatrix::from_xy(x, y);
}

DataMatrix simulate_logistic(Index n, const Vector& beta, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix x = gaussian_design(n, beta.size(), rng);
  const Vector eta = x * beta;
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
    y(i) = rng.uniform() < prob ? 1.0 : 0.0;
  }
  return DataMatrix::from_xy(x, y);
}

Vector padded_beta(std::initializer_list<double> head, Index p) {
  if (p < static_cast<Index>(head.size())) throw std::invalid_argument("p shorter than the given entries");
  Vector beta = Vector::Zero(p);
  Index j = 0;
  for (const double v : head) beta(j++) = v;
  return beta;
}

}  // namespace augmentor
