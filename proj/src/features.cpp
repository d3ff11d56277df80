#include "augmentor/features.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "augmentor/remote_client.hpp"

namespace augmentor {

namespace {

Matrix stack_flattened(const std::vector<GrayImage>& images, const FeatureSpec& spec) {
  const Index size = spec.downsample_height * spec.downsample_width;
  Matrix out(static_cast<Index>(images.size()), size);
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.row(static_cast<Index>(i)) =
        downsample_flatten(images[i], spec.downsample_height, spec.downsample_width).transpose();
  }
  return out;
}

SampleSet latents(const std::vector<GrayImage>& images, const RemoteGenerator& service) {
  Matrix out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Latent latent = service.encode_latent(images[i]);
    const auto width = static_cast<Index>(latent.values.size());
    if (i == 0) out.resize(static_cast<Index>(images.size()), width);
    if (width != out.cols()) throw MalformedResponse("latent sizes differ between images");
    for (Index k = 0; k < width; ++k) out(static_cast<Index>(i), k) = latent.values[static_cast<std::size_t>(k)];
  }
  return SampleSet(std::move(out));
}

}  // namespace

void FeatureSpec::validate() const {
  if (downsample_height < 1 || downsample_width < 1) {
    throw std::invalid_argument("downsample size must be positive");
  }
  if (pca_dims < 1 || pca_dims > downsample_height * downsample_width) {
    throw std::invalid_argument("pca_dims must lie in [1, h*w]");
  }
}

Vector downsample_flatten(const GrayImage& image, Index height, Index width) {
  Vector out(height * width);
  for (Index r = 0; r < height; ++r) {
    const Index sr = r * image.height() / height;
    for (Index c = 0; c < width; ++c) {
      const Index sc = c * image.width() / width;
      out(r * width + c) = image.pixels()(sr, sc);
    }
  }
  return out;
}

PcaFeatureMap PcaFeatureMap::fit(const std::vector<GrayImage>& reference, const FeatureSpec& spec) {
  spec.validate();
  if (reference.empty()) throw std::invalid_argument("feature map needs reference images");
  PcaFeatureMap map;
  map.spec_ = spec;
  const Matrix flat = stack_flattened(reference, spec);
  map.center_ = flat.colwise().mean().transpose();
  const Matrix centered = flat.rowwise() - map.center_.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(flat.rows());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition failed");
  // Eigenvalues ascend; take the trailing pca_dims vectors in descending order.
  const Index dim = cov.rows();
  map.basis_.resize(dim, spec.pca_dims);
  for (Index k = 0; k < spec.pca_dims; ++k) {
    Vector v = solver.eigenvectors().col(dim - 1 - k);
    Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    map.basis_.col(k) = v;
  }

  const Matrix projected = centered * map.basis_;
  map.feature_mean_ = Vector::Zero(spec.pca_dims);
  map.feature_scale_ = Vector::Ones(spec.pca_dims);
  if (spec.standardize) {
    map.feature_mean_ = projected.colwise().mean().transpose();
    for (Index k = 0; k < spec.pca_dims; ++k) {
      const double sd = std::sqrt((projected.col(k).array() - map.feature_mean_(k)).square().mean());
      map.feature_scale_(k) = sd > 1e-12 ? sd : 1.0;
    }
  }
  return map;
}

SampleSet PcaFeatureMap::transform(const std::vector<GrayImage>& images) const {
  if (images.empty()) throw std::invalid_argument("no images to transform");
  const Matrix flat = stack_flattened(images, spec_);
  Matrix z = (flat.rowwise() - center_.transpose()) * basis_;
  z.rowwise() -= feature_mean_.transpose();
  z.array().rowwise() /= feature_scale_.transpose().array();
  return SampleSet(std::move(z));
}

std::pair<SampleSet, SampleSet> extract_features(const std::vector<GrayImage>& originals,
                                                 const std::vector<GrayImage>& generated,
                                                 const FeatureSpec& spec,
                                                 const RemoteGenerator* service) {
  if (originals.empty() || generated.empty()) {
    throw std::invalid_argument("extract_features needs non-empty image lists");
  }
  if (spec.kind == FeatureKind::remote_latent) {
    if (!service) throw std::invalid_argument("remote_latent features need a service client");
    return {latents(originals, *service), latents(generated, *service)};
  }
  const auto map = PcaFeatureMap::fit(originals, spec);
  return {map.transform(originals), map.transform(generated)};
}

}  // namespace augmentor
