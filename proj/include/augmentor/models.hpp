#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "augmentor/data_matrix.hpp"

namespace augmentor {

enum class Family { linear, logistic };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Fitted GLM on the original (unstandardized) feature scale.
struct FitResult {
  Family family = Family::linear;
  Vector coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = true;

  /// Intercept plus x * coefficients (plus offset when given).
  [[nodiscard]] Vector linear_predictor(const Matrix& x, const Vector* offset = nullptr) const;
  /// Linear predictor for the Gaussian family, probability for the binomial family.
  [[nodiscard]] Vector predict(const Matrix& x, const Vector* offset = nullptr) const;
};

struct Metrics {
  double mse = 0.0;
  /// Set for the binomial family only (threshold 0.5).
  std::optional<double> misclassification_rate;
  Index n_eval = 0;
};

struct LassoOptions {
  double tol = 1e-7;
  int max_iter = 10000;
  /// Added to the linear predictor; the fit models y - offset.
  const Vector* offset = nullptr;
  /// When set, receives the penalized objective after every sweep.
  std::vector<double>* objective_trace = nullptr;
};

struct LogisticOptions {
  double tol = 1e-7;
  /// Budget of coordinate-descent sweeps across all reweighting steps.
  int max_iter = 10000;
  int max_outer = 100;
  const Vector* offset = nullptr;
};

/// Least squares with an unpenalized intercept via complete orthogonal
/// decomposition; rank-deficient designs get the minimum-norm solution.
FitResult fit_ols(const Matrix& x, const Vector& y);

/// Cyclic coordinate descent on (1/2n)|y - offset - b - X beta|^2 + lambda |beta|_1
/// with columns standardized internally (1/n variance); the penalty applies on
/// the standardized scale and the returned coefficients are unstandardized.
/// Constant columns get a zero coefficient.
FitResult fit_lasso(const Matrix& x, const Vector& y, double lambda, const LassoOptions& options = {});

/// L1-penalized logistic regression by iteratively reweighted coordinate
/// descent with step halving. Without a penalty, separable data is detected
/// by coefficient divergence and reported with converged = false.
FitResult fit_logistic(const Matrix& x, const Vector& y, double lambda,
                       const LogisticOptions& options = {});

/// Smallest lambda at which every standardized coefficient is zero.
double lambda_max(const Matrix& x, const Vector& y, Family family, const Vector* offset = nullptr);

/// Mean negative log-likelihood of the binomial model.
double logistic_loss(const Matrix& x, const Vector& y, double intercept, const Vector& coefficients,
                     const Vector* offset = nullptr);

/// Gradient of logistic_loss: element 0 is d/d intercept, then d/d coefficients.
Vector logistic_gradient(const Matrix& x, const Vector& y, double intercept,
                         const Vector& coefficients, const Vector* offset = nullptr);

struct CvOptions {
  int folds = 5;
  int n_lambda = 50;
  double min_ratio = 1e-4;
  std::uint64_t seed = 0;
};

struct CvResult {
  FitResult fit;
  std::vector<double> lambdas;
  std::vector<double> mean_loss;
  std::vector<double> fold_sd;
  std::size_t best_index = 0;
};

/// Seeded K-fold assignment: a permutation of 0..n-1 dealt round-robin.
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

/// Out-of-sample loss: squared error (Gaussian) or binomial deviance.
double prediction_loss(const FitResult& fit, const Matrix& x, const Vector& y,
                       const Vector* offset = nullptr);

/// Penalized fit with lambda chosen by K-fold CV over a log grid from
/// lambda_max down to lambda_max * min_ratio (plain minimum of mean loss).
CvResult fit_cv(const Matrix& x, const Vector& y, Family family, const CvOptions& options = {},
                const Vector* offset = nullptr);

/// Single penalized fit of either family.
FitResult fit_penalized(const Matrix& x, const Vector& y, Family family, double lambda,
                        const Vector* offset = nullptr);

Metrics evaluate(const FitResult& fit, const Matrix& x_test, const Vector& y_test);

}  // namespace augmentor
