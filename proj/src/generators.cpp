#include "augmentor/generators.hpp"

#include <algorithm>
#include <cmath>

#include "augmentor/random.hpp"

namespace augmentor {

void GenRequest::validate() const {
  if (!(strength >= kMinStrength && strength <= kMaxStrength)) {
    throw std::invalid_argument("strength must lie in [0.001, 1]");
  }
  if (!(guidance_scale > 0.0)) throw std::invalid_argument("guidance_scale must be positive");
  if (image.height() < 1) throw std::invalid_argument("request image is empty");
}

std::string to_string(Backend backend) {
  return backend == Backend::surrogate ? "surrogate" : "remote";
}

std::vector<double> strength_grid(double start, double stop, double step) {
  if (!(start > 0.0 && start <= stop && stop <= 1.0)) {
    throw std::invalid_argument("strength grid needs 0 < start <= stop <= 1");
  }
  if (!(step > 0.0)) throw std::invalid_argument("strength grid step must be positive");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = start + static_cast<double>(i) * step;
    grid.push_back(std::round(v * 1e9) / 1e9);
  }
  if (grid.empty()) throw std::invalid_argument("strength grid is empty");
  return grid;
}

GenResult generate_surrogate(const GenRequest& request) {
  request.validate();
  GenResult result{request.image, Backend::surrogate, request};
  const double k = request.strength;
  if (k < kIdentityStrength) return result;

  const Matrix& in = request.image.pixels();
  const Index h = in.rows();
  const Index w = in.cols();
  Rng rng(request.seed);

  Matrix eta(h, w);
  for (Index c = 0; c < w; ++c) {
    const double mean = in.col(c).mean();
    const double var = (in.col(c).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    for (Index r = 0; r < h; ++r) eta(r, c) = mean + sd * rng.normal();
  }

  Matrix out(h, w);
  for (Index c = 0; c < w; ++c) {
    for (Index r = 0; r < h; ++r) {
      const Index lo = std::max<Index>(0, r - 1);
      const Index hi = std::min<Index>(h - 1, r + 1);
      double sum = 0.0;
      for (Index i = lo; i <= hi; ++i) sum += eta(i, c);
      const double smooth = sum / static_cast<double>(hi - lo + 1);
      out(r, c) = std::clamp((1.0 - k) * in(r, c) + k * smooth, 0.0, 1.0);
    }
  }
  result.image = GrayImage(std::move(out));
  return result;
}

}  // namespace augmentor
