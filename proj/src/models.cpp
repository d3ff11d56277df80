#include "augmentor/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

// Standardized coefficients beyond this magnitude mean the likelihood has no
// finite maximizer (separation).
constexpr double kDivergence = 1e3;
constexpr double kMinWeight = 1e-5;

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + e^t) without overflow.
double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

void require_xy(const Matrix& x, const Vector& y) {
  if (x.rows() == 0) throw std::invalid_argument("empty design matrix");
  if (x.rows() != y.size()) throw std::invalid_argument("design and response lengths differ");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite model input");
}

void require_binary(const Vector& y) {
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw std::invalid_argument("logistic response must be 0/1");
  }
}

Vector offset_or_zero(const Vector* offset, Index n) {
  if (!offset) return Vector::Zero(n);
  if (offset->size() != n) throw std::invalid_argument("offset length mismatch");
  return *offset;
}

struct Standardized {
  Vector mean;
  Vector scale;
  std::vector<Index> active;
  Matrix xs;  // active columns only
};

Standardized standardize(const Matrix& x) {
  Standardized s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale = Vector::Zero(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().sum() / n);
    s.scale(j) = sd;
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(j)))) s.active.push_back(j);
  }
  s.xs.resize(x.rows(), static_cast<Index>(s.active.size()));
  for (std::size_t k = 0; k < s.active.size(); ++k) {
    const Index j = s.active[k];
    s.xs.col(static_cast<Index>(k)) = (x.col(j).array() - s.mean(j)) / s.scale(j);
  }
  return s;
}

FitResult to_original_scale(const Standardized& s, const Vector& beta_s, double intercept_s,
                            Family family, double lambda, int iterations, bool converged) {
  FitResult fit;
  fit.family = family;
  fit.lambda = lambda;
  fit.iterations = iterations;
  fit.converged = converged;
  fit.coefficients = Vector::Zero(s.mean.size());
  double shift = 0.0;
  for (std::size_t k = 0; k < s.active.size(); ++k) {
    const Index j = s.active[k];
    const double b = beta_s(static_cast<Index>(k)) / s.scale(j);
    fit.coefficients(j) = b;
    shift += s.mean(j) * b;
  }
  fit.intercept = intercept_s - shift;
  return fit;
}

struct SolveStats {
  int sweeps = 0;
  bool converged = false;
};

/// Coordinate descent for (1/2n)|yc - Xs beta|^2 + lambda |beta|_1 on
/// centred response and standardized columns. Uses covariance updates when
/// n >= p and residual updates otherwise.
class LinearSolver {
 public:
  LinearSolver(const Matrix& xs, const Vector& yc) : xs_(xs), yc_(yc) {
    n_ = static_cast<double>(xs.rows());
    gram_mode_ = xs.rows() >= xs.cols();
    diag_ = (xs.array().square().colwise().sum() / n_).transpose();
    if (gram_mode_) {
      gram_ = xs.transpose() * xs / n_;
      corr_ = xs.transpose() * yc / n_;
      yy_ = yc.squaredNorm() / n_;
    }
  }

  SolveStats solve(double lambda, Vector& beta, double tol, int max_iter,
                   std::vector<double>* trace) const {
    const Index p = xs_.cols();
    SolveStats stats;
    if (p == 0) {
      stats.converged = true;
      if (trace) trace->push_back(objective(lambda, beta, yc_));
      return stats;
    }
    if (gram_mode_) {
      Vector gb = gram_ * beta;
      while (stats.sweeps < max_iter) {
        ++stats.sweeps;
        double max_delta = 0.0;
        for (Index j = 0; j < p; ++j) {
          const double g = corr_(j) - gb(j) + diag_(j) * beta(j);
          const double updated = soft_threshold(g, lambda) / diag_(j);
          const double d = updated - beta(j);
          if (d != 0.0) {
            beta(j) = updated;
            gb.noalias() += d * gram_.col(j);
            max_delta = std::max(max_delta, std::abs(d));
          }
        }
        if (trace) trace->push_back(gram_objective(lambda, beta));
        if (max_delta < tol) {
          stats.converged = true;
          break;
        }
      }
      return stats;
    }
    Vector r = yc_ - xs_ * beta;
    while (stats.sweeps < max_iter) {
      ++stats.sweeps;
      double max_delta = 0.0;
      for (Index j = 0; j < p; ++j) {
        const double g = xs_.col(j).dot(r) / n_ + diag_(j) * beta(j);
        const double updated = soft_threshold(g, lambda) / diag_(j);
        const double d = updated - beta(j);
        if (d != 0.0) {
          beta(j) = updated;
          r.noalias() -= d * xs_.col(j);
          max_delta = std::max(max_delta, std::abs(d));
        }
      }
      if (trace) trace->push_back(0.5 * r.squaredNorm() / n_ + lambda * beta.lpNorm<1>());
      if (max_delta < tol) {
        stats.converged = true;
        break;
      }
    }
    return stats;
  }

 private:
  double objective(double lambda, const Vector& beta, const Vector& yc) const {
    const Vector r = yc - xs_ * beta;
    return 0.5 * r.squaredNorm() / n_ + lambda * beta.lpNorm<1>();
  }
  double gram_objective(double lambda, const Vector& beta) const {
    return 0.5 * (yy_ - 2.0 * corr_.dot(beta) + beta.dot(gram_ * beta)) + lambda * beta.lpNorm<1>();
  }

  const Matrix& xs_;
  const Vector& yc_;
  double n_ = 0.0;
  bool gram_mode_ = false;
  Vector diag_;
  Matrix gram_;
  Vector corr_;
  double yy_ = 0.0;
};

struct LogisticState {
  double intercept = 0.0;
  Vector beta;
};

struct LogisticStats {
  int outer = 0;
  bool converged = false;
  bool diverged = false;
};

/// IRLS with a weighted coordinate-descent inner solver on standardized columns.
class LogisticSolver {
 public:
  LogisticSolver(const Matrix& xs, const Vector& y, const Vector& offset)
      : xs_(xs), y_(y), offset_(offset), n_(static_cast<double>(xs.rows())) {}

  double objective(double lambda, const LogisticState& s) const {
    const Vector eta = (offset_ + xs_ * s.beta).array() + s.intercept;
    double total = 0.0;
    for (Index i = 0; i < eta.size(); ++i) total += log1pexp(eta(i)) - y_(i) * eta(i);
    return total / n_ + lambda * s.beta.lpNorm<1>();
  }

  LogisticStats solve(double lambda, LogisticState& state, double tol, int max_sweeps,
                      int max_outer) const {
    const Index p = xs_.cols();
    const Index n = xs_.rows();
    LogisticStats stats;
    int sweeps_used = 0;
    double current = objective(lambda, state);
    while (stats.outer < max_outer && sweeps_used < max_sweeps) {
      ++stats.outer;
      const Vector eta = (offset_ + xs_ * state.beta).array() + state.intercept;
      Vector w(n);
      Vector z(n);
      for (Index i = 0; i < n; ++i) {
        const double prob = sigmoid(eta(i));
        w(i) = std::max(prob * (1.0 - prob), kMinWeight);
        z(i) = eta(i) - offset_(i) + (y_(i) - prob) / w(i);
      }
      const double wsum = w.sum();
      Vector wxx(p);
      for (Index j = 0; j < p; ++j) wxx(j) = w.dot(xs_.col(j).cwiseAbs2()) / n_;

      LogisticState next = state;
      Vector r = z - xs_ * next.beta;
      r.array() -= next.intercept;
      while (sweeps_used < max_sweeps) {
        ++sweeps_used;
        double max_delta = 0.0;
        for (Index j = 0; j < p; ++j) {
          if (wxx(j) <= 0.0) continue;
          const double g = xs_.col(j).cwiseProduct(w).dot(r) / n_ + wxx(j) * next.beta(j);
          const double updated = soft_threshold(g, lambda) / wxx(j);
          const double d = updated - next.beta(j);
          if (d != 0.0) {
            next.beta(j) = updated;
            r.noalias() -= d * xs_.col(j);
            max_delta = std::max(max_delta, std::abs(d));
          }
        }
        const double db = w.dot(r) / wsum;
        next.intercept += db;
        r.array() -= db;
        max_delta = std::max(max_delta, std::abs(db));
        if (max_delta < 0.1 * tol) break;
      }

      // Step halving keeps the penalized objective non-increasing.
      double candidate = objective(lambda, next);
      for (int halvings = 0; halvings < 30 && candidate > current + 1e-12 * (1.0 + std::abs(current));
           ++halvings) {
        next.intercept = 0.5 * (next.intercept + state.intercept);
        next.beta = 0.5 * (next.beta + state.beta);
        candidate = objective(lambda, next);
      }
      double change = std::abs(next.intercept - state.intercept);
      if (p > 0) change = std::max(change, (next.beta - state.beta).cwiseAbs().maxCoeff());
      state = std::move(next);
      current = candidate;
      const double size = p > 0 ? state.beta.cwiseAbs().maxCoeff() : 0.0;
      if (size > kDivergence || std::abs(state.intercept) > kDivergence) {
        stats.diverged = true;
        return stats;
      }
      if (change < tol) {
        stats.converged = true;
        return stats;
      }
    }
    return stats;
  }

 private:
  const Matrix& xs_;
  const Vector& y_;
  const Vector& offset_;
  double n_;
};

double initial_logit(const Vector& y) {
  const double mean = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  return std::log(mean / (1.0 - mean));
}

// Intercept-only binomial fit with offset, by Newton iterations.
double intercept_only_logit(const Vector& y, const Vector& offset) {
  double b = initial_logit(y);
  for (int it = 0; it < 100; ++it) {
    double grad = 0.0;
    double hess = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      const double prob = sigmoid(offset(i) + b);
      grad += prob - y(i);
      hess += prob * (1.0 - prob);
    }
    if (hess < 1e-12) break;
    const double step = grad / hess;
    b -= step;
    if (std::abs(step) < 1e-12) break;
  }
  return b;
}

}  // namespace

std::string to_string(Family family) { return family == Family::linear ? "linear" : "logistic"; }

Family family_from_string(const std::string& name) {
  if (name == "linear") return Family::linear;
  if (name == "logistic") return Family::logistic;
  throw std::invalid_argument("unknown model family '" + name + "'");
}

Vector FitResult::linear_predictor(const Matrix& x, const Vector* offset) const {
  if (x.cols() != coefficients.size()) throw std::invalid_argument("predict: column count mismatch");
  Vector eta = x * coefficients;
  eta.array() += intercept;
  if (offset) eta += *offset;
  return eta;
}

Vector FitResult::predict(const Matrix& x, const Vector* offset) const {
  Vector eta = linear_predictor(x, offset);
  if (family == Family::logistic) eta = eta.unaryExpr([](double t) { return sigmoid(t); });
  return eta;
}

FitResult fit_ols(const Matrix& x, const Vector& y) {
  require_xy(x, y);
  const Vector x_mean = x.colwise().mean().transpose();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean.transpose();
  const Vector yc = y.array() - y_mean;
  FitResult fit;
  fit.family = Family::linear;
  if (x.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
    fit.coefficients = cod.solve(yc);
  } else {
    fit.coefficients = Vector(0);
  }
  fit.intercept = y_mean - x_mean.dot(fit.coefficients);
  fit.iterations = 1;
  fit.converged = true;
  return fit;
}

FitResult fit_lasso(const Matrix& x, const Vector& y, double lambda, const LassoOptions& options) {
  require_xy(x, y);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const Vector target = y - offset_or_zero(options.offset, y.size());
  const double y_mean = target.mean();
  const Vector yc = target.array() - y_mean;
  const Standardized s = standardize(x);
  Vector beta = Vector::Zero(s.xs.cols());
  const LinearSolver solver(s.xs, yc);
  const auto stats = solver.solve(lambda, beta, options.tol, options.max_iter, options.objective_trace);
  return to_original_scale(s, beta, y_mean, Family::linear, lambda, stats.sweeps, stats.converged);
}

FitResult fit_logistic(const Matrix& x, const Vector& y, double lambda, const LogisticOptions& options) {
  require_xy(x, y);
  require_binary(y);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const Vector offset = offset_or_zero(options.offset, y.size());
  const Standardized s = standardize(x);
  LogisticState state{options.offset ? intercept_only_logit(y, offset) : initial_logit(y),
                      Vector::Zero(s.xs.cols())};
  const LogisticSolver solver(s.xs, y, offset);
  const auto stats = solver.solve(lambda, state, options.tol, options.max_iter, options.max_outer);
  return to_original_scale(s, state.beta, state.intercept, Family::logistic, lambda, stats.outer,
                           stats.converged && !stats.diverged);
}

double lambda_max(const Matrix& x, const Vector& y, Family family, const Vector* offset) {
  require_xy(x, y);
  const Vector off = offset_or_zero(offset, y.size());
  const Standardized s = standardize(x);
  if (s.xs.cols() == 0) return 0.0;
  Vector resid;
  if (family == Family::linear) {
    const Vector target = y - off;
    resid = target.array() - target.mean();
  } else {
    require_binary(y);
    const double b = intercept_only_logit(y, off);
    resid = Vector(y.size());
    for (Index i = 0; i < y.size(); ++i) resid(i) = y(i) - sigmoid(off(i) + b);
  }
  return (s.xs.transpose() * resid).cwiseAbs().maxCoeff() / static_cast<double>(y.size());
}

double logistic_loss(const Matrix& x, const Vector& y, double intercept, const Vector& coefficients,
                     const Vector* offset) {
  Vector eta = x * coefficients;
  eta.array() += intercept;
  if (offset) eta += *offset;
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) total += log1pexp(eta(i)) - y(i) * eta(i);
  return total / static_cast<double>(y.size());
}

Vector logistic_gradient(const Matrix& x, const Vector& y, double intercept,
                         const Vector& coefficients, const Vector* offset) {
  Vector eta = x * coefficients;
  eta.array() += intercept;
  if (offset) eta += *offset;
  Vector resid(y.size());
  for (Index i = 0; i < y.size(); ++i) resid(i) = sigmoid(eta(i)) - y(i);
  Vector grad(coefficients.size() + 1);
  const auto n = static_cast<double>(y.size());
  grad(0) = resid.sum() / n;
  grad.tail(coefficients.size()) = x.transpose() * resid / n;
  return grad;
}

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n < folds) throw std::invalid_argument("fewer rows than cross-validation folds");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold;
}

double prediction_loss(const FitResult& fit, const Matrix& x, const Vector& y, const Vector* offset) {
  const Vector pred = fit.predict(x, offset);
  if (fit.family == Family::linear) return (pred - y).squaredNorm() / static_cast<double>(y.size());
  double dev = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double prob = std::clamp(pred(i), 1e-15, 1.0 - 1e-15);
    dev += y(i) > 0.5 ? -std::log(prob) : -std::log1p(-prob);
  }
  return 2.0 * dev / static_cast<double>(y.size());
}

FitResult fit_penalized(const Matrix& x, const Vector& y, Family family, double lambda,
                        const Vector* offset) {
  if (family == Family::linear) {
    LassoOptions opts;
    opts.offset = offset;
    return fit_lasso(x, y, lambda, opts);
  }
  LogisticOptions opts;
  opts.offset = offset;
  return fit_logistic(x, y, lambda, opts);
}

CvResult fit_cv(const Matrix& x, const Vector& y, Family family, const CvOptions& options,
                const Vector* offset) {
  require_xy(x, y);
  if (options.n_lambda < 1) throw std::invalid_argument("n_lambda must be positive");
  const Vector off = offset_or_zero(offset, y.size());
  const auto folds = fold_assignment(x.rows(), options.folds, options.seed);

  CvResult cv;
  double top = lambda_max(x, y, family, offset);
  if (!(top > 0.0)) top = 1e-8;
  cv.lambdas.resize(static_cast<std::size_t>(options.n_lambda));
  for (int k = 0; k < options.n_lambda; ++k) {
    const double frac = options.n_lambda == 1 ? 0.0 : static_cast<double>(k) / (options.n_lambda - 1);
    cv.lambdas[static_cast<std::size_t>(k)] = top * std::pow(options.min_ratio, frac);
  }

  const std::size_t n_lambda = cv.lambdas.size();
  std::vector<std::vector<double>> losses(n_lambda, std::vector<double>(static_cast<std::size_t>(options.folds)));
  for (int f = 0; f < options.folds; ++f) {
    std::vector<Index> train;
    std::vector<Index> valid;
    for (Index i = 0; i < x.rows(); ++i) (folds[static_cast<std::size_t>(i)] == f ? valid : train).push_back(i);
    Matrix xt(static_cast<Index>(train.size()), x.cols());
    Vector yt(static_cast<Index>(train.size()));
    Vector ot(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      xt.row(static_cast<Index>(i)) = x.row(train[i]);
      yt(static_cast<Index>(i)) = y(train[i]);
      ot(static_cast<Index>(i)) = off(train[i]);
    }
    Matrix xv(static_cast<Index>(valid.size()), x.cols());
    Vector yv(static_cast<Index>(valid.size()));
    Vector ov(static_cast<Index>(valid.size()));
    for (std::size_t i = 0; i < valid.size(); ++i) {
      xv.row(static_cast<Index>(i)) = x.row(valid[i]);
      yv(static_cast<Index>(i)) = y(valid[i]);
      ov(static_cast<Index>(i)) = off(valid[i]);
    }

    const Standardized s = standardize(xt);
    if (family == Family::linear) {
      const Vector target = yt - ot;
      const double y_mean = target.mean();
      const Vector yc = target.array() - y_mean;
      const LinearSolver solver(s.xs, yc);
      Vector beta = Vector::Zero(s.xs.cols());
      for (std::size_t k = 0; k < n_lambda; ++k) {
        const auto stats = solver.solve(cv.lambdas[k], beta, 1e-7, 10000, nullptr);
        const FitResult fit =
            to_original_scale(s, beta, y_mean, family, cv.lambdas[k], stats.sweeps, stats.converged);
        losses[k][static_cast<std::size_t>(f)] = prediction_loss(fit, xv, yv, &ov);
      }
    } else {
      require_binary(yt);
      const LogisticSolver solver(s.xs, yt, ot);
      LogisticState state{intercept_only_logit(yt, ot), Vector::Zero(s.xs.cols())};
      for (std::size_t k = 0; k < n_lambda; ++k) {
        const auto stats = solver.solve(cv.lambdas[k], state, 1e-7, 10000, 100);
        const FitResult fit = to_original_scale(s, state.beta, state.intercept, family, cv.lambdas[k],
                                                stats.outer, stats.converged);
        losses[k][static_cast<std::size_t>(f)] = prediction_loss(fit, xv, yv, &ov);
        if (stats.diverged) {
          // Later (smaller) lambdas only diverge further; keep their losses at this level.
          for (std::size_t rest = k + 1; rest < n_lambda; ++rest) {
            losses[rest][static_cast<std::size_t>(f)] = losses[k][static_cast<std::size_t>(f)];
          }
          break;
        }
      }
    }
  }

  cv.mean_loss.resize(n_lambda);
  cv.fold_sd.resize(n_lambda);
  for (std::size_t k = 0; k < n_lambda; ++k) {
    const auto& l = losses[k];
    const double mean = std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
    double ss = 0.0;
    for (const double v : l) ss += (v - mean) * (v - mean);
    cv.mean_loss[k] = mean;
    cv.fold_sd[k] = std::sqrt(ss / static_cast<double>(l.size() - 1));
  }
  cv.best_index = static_cast<std::size_t>(
      std::min_element(cv.mean_loss.begin(), cv.mean_loss.end()) - cv.mean_loss.begin());
  cv.fit = fit_penalized(x, y, family, cv.lambdas[cv.best_index], offset);
  return cv;
}

Metrics evaluate(const FitResult& fit, const Matrix& x_test, const Vector& y_test) {
  if (x_test.rows() == 0 || y_test.size() == 0) throw std::invalid_argument("empty test set");
  if (x_test.rows() != y_test.size()) throw std::invalid_argument("test set length mismatch");
  const Vector pred = fit.predict(x_test);
  Metrics m;
  m.n_eval = y_test.size();
  m.mse = (pred - y_test).squaredNorm() / static_cast<double>(y_test.size());
  if (fit.family == Family::logistic) {
    Index wrong = 0;
    for (Index i = 0; i < y_test.size(); ++i) {
      const double label = pred(i) > 0.5 ? 1.0 : 0.0;
      if (label != y_test(i)) ++wrong;
    }
    m.misclassification_rate = static_cast<double>(wrong) / static_cast<double>(y_test.size());
  }
  return m;
}

}  // namespace augmentor
