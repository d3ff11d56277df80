#include "augmentor/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

// Pooled sets larger than this are strided down before the O(N^2) median.
constexpr Index kMedianPointCap = 2000;

void require_same_dims(const SampleSet& a, const SampleSet& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("sample sets differ in dimensionality");
}

void require_finite(std::span<const double> v) {
  for (const double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite sample value");
  }
}

std::vector<double> masses(const SampleSet& s) {
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s.mass(i);
  return out;
}

std::vector<double> project(const Matrix& points, const Eigen::Ref<const Vector>& dir) {
  const Vector p = points * dir;
  return {p.data(), p.data() + p.size()};
}

std::vector<double> column(const Matrix& points, Index c) {
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i) out[static_cast<std::size_t>(i)] = points(i, c);
  return out;
}

double projected_w1(const SampleSet& a, const SampleSet& b, std::span<const double> pa,
                    std::span<const double> pb) {
  if (!a.weights() && !b.weights()) return w1_1d(pa, pb);
  const auto ma = masses(a);
  const auto mb = masses(b);
  return w1_1d_weighted(pa, ma, pb, mb);
}

double histogram_tv(std::span<const double> pa, std::span<const double> ma,
                    std::span<const double> pb, std::span<const double> mb, int bins) {
  const auto [a_lo, a_hi] = std::minmax_element(pa.begin(), pa.end());
  const auto [b_lo, b_hi] = std::minmax_element(pb.begin(), pb.end());
  const double lo = std::min(*a_lo, *b_lo);
  const double hi = std::max(*a_hi, *b_hi);
  if (!(hi > lo)) return 0.0;
  std::vector<double> diff(static_cast<std::size_t>(bins), 0.0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  auto bin_of = [&](double x) {
    auto k = static_cast<long>(std::floor((x - lo) * scale));
    return static_cast<std::size_t>(std::clamp<long>(k, 0, bins - 1));
  };
  for (std::size_t i = 0; i < pa.size(); ++i) diff[bin_of(pa[i])] += ma[i];
  for (std::size_t i = 0; i < pb.size(); ++i) diff[bin_of(pb[i])] -= mb[i];
  double total = 0.0;
  for (const double d : diff) total += std::abs(d);
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace

SampleSet::SampleSet(Matrix points, std::optional<Vector> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw std::invalid_argument("SampleSet needs at least one point");
  }
  if (!points_.allFinite()) throw std::invalid_argument("SampleSet points must be finite");
  if (weights_) {
    if (weights_->size() != points_.rows()) {
      throw std::invalid_argument("SampleSet weights length mismatch");
    }
    if ((weights_->array() < 0.0).any() || std::abs(weights_->sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("SampleSet weights must be nonnegative and sum to 1");
    }
  }
}

SampleSet SampleSet::from_values(std::span<const double> values) {
  Matrix m(static_cast<Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Index>(i), 0) = values[i];
  return SampleSet(std::move(m));
}

double SampleSet::mass(Index i) const {
  return weights_ ? (*weights_)(i) : 1.0 / static_cast<double>(points_.rows());
}

double w1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1_1d needs non-empty samples");
  require_finite(a);
  require_finite(b);
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const std::size_t m = sa.size();
  const std::size_t n = sb.size();
  if (m == n) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(m);
  }
  // Quantile coupling in integer mass units: each a-atom holds n units and
  // each b-atom m units out of m*n, so breakpoints are matched exactly.
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t ra = n;
  std::size_t rb = m;
  double total = 0.0;
  while (i < m && j < n) {
    const std::size_t t = std::min(ra, rb);
    total += static_cast<double>(t) * std::abs(sa[i] - sb[j]);
    ra -= t;
    rb -= t;
    if (ra == 0) {
      ++i;
      ra = n;
    }
    if (rb == 0) {
      ++j;
      rb = m;
    }
  }
  return total / (static_cast<double>(m) * static_cast<double>(n));
}

double w1_1d_weighted(std::span<const double> a, std::span<const double> a_mass,
                      std::span<const double> b, std::span<const double> b_mass) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1_1d needs non-empty samples");
  if (a.size() != a_mass.size() || b.size() != b_mass.size()) {
    throw std::invalid_argument("w1_1d_weighted: mass length mismatch");
  }
  require_finite(a);
  require_finite(b);
  auto sorted_order = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    return idx;
  };
  const auto oa = sorted_order(a);
  const auto ob = sorted_order(b);
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = a_mass[oa[0]];
  double rb = b_mass[ob[0]];
  double total = 0.0;
  constexpr double kEps = 1e-15;
  while (i < oa.size() && j < ob.size()) {
    const double t = std::min(ra, rb);
    total += t * std::abs(a[oa[i]] - b[ob[j]]);
    ra -= t;
    rb -= t;
    if (ra <= kEps && ++i < oa.size()) ra = a_mass[oa[i]];
    if (rb <= kEps && ++j < ob.size()) rb = b_mass[ob[j]];
  }
  return total;
}

Matrix projection_directions(Index q, int n_projections, std::uint64_t seed) {
  if (q < 1) throw std::invalid_argument("projection dimension must be positive");
  if (n_projections < 1) throw std::invalid_argument("n_projections must be positive");
  Matrix dirs(q, n_projections);
  for (int l = 0; l < n_projections; ++l) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(l)}));
    Vector u(q);
    do {
      for (Index k = 0; k < q; ++k) u(k) = rng.normal();
    } while (u.norm() == 0.0);
    dirs.col(l) = u / u.norm();
  }
  return dirs;
}

double sliced_w1(const SampleSet& a, const SampleSet& b, int n_projections, std::uint64_t seed) {
  require_same_dims(a, b);
  if (a.dims() == 1) {
    const auto pa = column(a.points(), 0);
    const auto pb = column(b.points(), 0);
    return projected_w1(a, b, pa, pb);
  }
  const Matrix dirs = projection_directions(a.dims(), n_projections, seed);
  double total = 0.0;
  for (int l = 0; l < n_projections; ++l) {
    const auto pa = project(a.points(), dirs.col(l));
    const auto pb = project(b.points(), dirs.col(l));
    total += projected_w1(a, b, pa, pb);
  }
  return total / static_cast<double>(n_projections);
}

double median_heuristic_bandwidth(const SampleSet& a, const SampleSet& b) {
  require_same_dims(a, b);
  const Index total = a.size() + b.size();
  const Index stride = (total + kMedianPointCap - 1) / kMedianPointCap;
  std::vector<Eigen::RowVectorXd> pts;
  for (Index i = 0; i < total; i += stride) {
    pts.push_back(i < a.size() ? a.points().row(i) : b.points().row(i - a.size()));
  }
  if (pts.size() < 2) return 1.0;
  std::vector<double> d;
  d.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back((pts[i] - pts[j]).norm());
  }
  // Lower median for even counts.
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>((d.size() - 1) / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double mmd(const SampleSet& a, const SampleSet& b, double bandwidth, MmdEstimator estimator) {
  require_same_dims(a, b);
  const double sigma = bandwidth > 0.0 ? bandwidth : median_heuristic_bandwidth(a, b);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const Matrix& x = a.points();
  const Matrix& y = b.points();
  auto kernel = [&](const Matrix& p, Index i, const Matrix& q, Index j) {
    return std::exp(-(p.row(i) - q.row(j)).squaredNorm() * inv);
  };
  const Index m = x.rows();
  const Index n = y.rows();

  if (estimator == MmdEstimator::unbiased) {
    if (a.weights() || b.weights()) {
      throw std::invalid_argument("unbiased MMD is defined for unweighted samples only");
    }
    if (m < 2 || n < 2) throw std::invalid_argument("unbiased MMD needs at least 2 points per set");
    double kxx = 0.0;
    double kyy = 0.0;
    double kxy = 0.0;
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j)
        if (i != j) kxx += kernel(x, i, x, j);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) kyy += kernel(y, i, y, j);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) kxy += kernel(x, i, y, j);
    const auto md = static_cast<double>(m);
    const auto nd = static_cast<double>(n);
    return kxx / (md * (md - 1.0)) + kyy / (nd * (nd - 1.0)) - 2.0 * kxy / (md * nd);
  }

  double kxx = 0.0;
  double kyy = 0.0;
  double kxy = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) kxx += a.mass(i) * a.mass(j) * kernel(x, i, x, j);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) kyy += b.mass(i) * b.mass(j) * kernel(y, i, y, j);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) kxy += a.mass(i) * b.mass(j) * kernel(x, i, y, j);
  return std::max(0.0, kxx + kyy - 2.0 * kxy);
}

double tv_hist(const SampleSet& a, const SampleSet& b, int bins, int n_projections,
               std::uint64_t seed) {
  require_same_dims(a, b);
  if (bins < 1) throw std::invalid_argument("tv_hist needs at least one bin");
  const auto ma = masses(a);
  const auto mb = masses(b);
  if (a.dims() == 1) {
    return histogram_tv(column(a.points(), 0), ma, column(b.points(), 0), mb, bins);
  }
  const Matrix dirs = projection_directions(a.dims(), n_projections, seed);
  double total = 0.0;
  for (int l = 0; l < n_projections; ++l) {
    total += histogram_tv(project(a.points(), dirs.col(l)), ma, project(b.points(), dirs.col(l)),
                          mb, bins);
  }
  return total / static_cast<double>(n_projections);
}

}  // namespace augmentor
