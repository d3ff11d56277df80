#include "augmentor/bound_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

void require_1d(const SampleSet& s) {
  if (s.size() < 1) throw std::invalid_argument("sample must not be empty");
  if (s.dims() != 1) throw std::invalid_argument("bound checks need one-dimensional samples");
}

double expected_loss(const SampleSet& s, const LossSpec& loss) {
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) acc += s.mass(i) * loss(s.points()(i, 0));
  return acc;
}

std::vector<double> column(const SampleSet& s) {
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s.points()(i, 0);
  return out;
}

std::vector<double> masses(const SampleSet& s) {
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s.mass(i);
  return out;
}

double exact_w1(const SampleSet& p, const SampleSet& q) {
  if (!p.weights() && !q.weights()) return w1_1d(column(p), column(q));
  return w1_1d_weighted(column(p), masses(p), column(q), masses(q));
}

}  // namespace

std::string to_string(LossKind kind) {
  return kind == LossKind::absolute_linear ? "absolute_linear" : "squared_clipped";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "absolute_linear") return LossKind::absolute_linear;
  if (name == "squared_clipped") return LossKind::squared_clipped;
  throw std::invalid_argument("unknown loss kind '" + name + "'");
}

double analytic_lipschitz(LossKind kind, double h1, double bound) {
  if (kind == LossKind::absolute_linear) return std::abs(h1);
  return 2.0 * std::sqrt(bound) * std::abs(h1);
}

LossSpec LossSpec::make(LossKind kind, double h0, double h1, double bound) {
  LossSpec spec{kind, analytic_lipschitz(kind, h1, bound), bound, h0, h1};
  spec.validate();
  return spec;
}

double LossSpec::operator()(double z) const {
  const double u = h0 + h1 * z;
  return kind == LossKind::absolute_linear ? std::min(std::abs(u), bound) : std::min(u * u, bound);
}

void LossSpec::validate() const {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw std::invalid_argument("loss bound must be positive");
  if (!std::isfinite(h0) || !std::isfinite(h1)) throw std::invalid_argument("hypothesis must be finite");
  // h1 = 0 gives a constant loss, Lipschitz with constant 0.
  if (!(lipschitz_constant >= 0.0) || !std::isfinite(lipschitz_constant)) {
    throw std::invalid_argument("lipschitz constant must be finite and >= 0");
  }
  if (lipschitz_constant < analytic_lipschitz(kind, h1, bound) * (1.0 - 1e-12)) {
    throw std::invalid_argument("declared lipschitz constant is below the analytic value");
  }
}

DualityCheck duality_gap_check(const SampleSet& p, const SampleSet& q, const LossSpec& loss) {
  require_1d(p);
  require_1d(q);
  loss.validate();
  DualityCheck out;
  out.gap = std::abs(expected_loss(p, loss) - expected_loss(q, loss));
  out.w1 = exact_w1(p, q);
  out.holds = out.gap <= loss.lipschitz_constant * out.w1 + 1e-9;
  return out;
}

RademacherEstimate rademacher_estimate(const std::vector<LossSpec>& grid, const SampleSet& sample,
                                       int n_sign_draws, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("hypothesis grid must not be empty");
  if (n_sign_draws < 100) throw std::invalid_argument("n_sign_draws must be >= 100");
  require_1d(sample);
  const Index n = sample.size();
  Matrix losses(static_cast<Index>(grid.size()), n);
  for (std::size_t h = 0; h < grid.size(); ++h) {
    grid[h].validate();
    for (Index i = 0; i < n; ++i) losses(static_cast<Index>(h), i) = grid[h](sample.points()(i, 0));
  }

  std::vector<double> sups(static_cast<std::size_t>(n_sign_draws));
  Vector sigma(n);
  for (int d = 0; d < n_sign_draws; ++d) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(d)}));
    for (Index i = 0; i < n; ++i) sigma(i) = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    sups[static_cast<std::size_t>(d)] = (losses * sigma).cwiseAbs().maxCoeff() / static_cast<double>(n);
  }
  RademacherEstimate out;
  double sum = 0.0;
  for (const double s : sups) sum += s;
  out.value = sum / n_sign_draws;
  double ss = 0.0;
  for (const double s : sups) ss += (s - out.value) * (s - out.value);
  out.standard_error = std::sqrt(ss / (n_sign_draws - 1.0) / n_sign_draws);
  return out;
}

BoundReport theorem_bound_check(const SampleSet& real, const SampleSet& synth, const LossSpec& loss,
                                const std::vector<LossSpec>& hypothesis_grid, double delta,
                                std::uint64_t seed, int n_sign_draws) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  require_1d(real);
  require_1d(synth);
  loss.validate();
  BoundReport r;
  r.delta = delta;
  r.lhs = expected_loss(real, loss) - expected_loss(synth, loss);
  r.w1_term = loss.lipschitz_constant * exact_w1(real, synth);
  r.rademacher_term = 2.0 * rademacher_estimate(hypothesis_grid, synth, n_sign_draws, seed).value;
  const auto n = static_cast<double>(synth.size());
  r.confidence_term = loss.bound * std::sqrt(std::log(1.0 / delta) / (2.0 * n));
  r.holds = r.lhs <= r.w1_term + r.rademacher_term + r.confidence_term + 1e-9;
  return r;
}

}  // namespace augmentor
