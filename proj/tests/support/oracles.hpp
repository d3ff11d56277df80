#pragma once

#include <vector>

#include "augmentor/data_matrix.hpp"
#include "augmentor/random.hpp"

// Independent reference computations used to check the library.
namespace oracle {

using augmentor::Matrix;
using augmentor::Vector;

/// Min over all m! assignments of mean |a_i - b_pi(i)|.
double w1_all_assignments(const std::vector<double>& a, const std::vector<double>& b);

/// Minimum total cost perfect matching on a square cost matrix (Hungarian
/// algorithm, O(n^3)).
double assignment_cost(const Matrix& cost);

/// Exact W1 between equal-size uniform point clouds via assignment_cost.
double w1_exact_points(const Matrix& a, const Matrix& b);

/// Squared MMD with a Gaussian kernel by direct double sums.
double mmd_direct(const Matrix& a, const Matrix& b, double sigma, bool unbiased);

/// E|sigma_1 + ... + sigma_n| for independent fair signs, by the binomial sum.
double expected_abs_walk(int n);

double soft_threshold(double z, double lambda);

/// Random matrix with i.i.d. uniform entries in [lo, hi).
Matrix uniform_matrix(augmentor::Rng& rng, int rows, int cols, double lo, double hi);
std::vector<double> uniform_values(augmentor::Rng& rng, int n, double lo, double hi);

}  // namespace oracle
