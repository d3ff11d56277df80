#pragma once

#include <utility>
#include <vector>

#include "augmentor/distances.hpp"
#include "augmentor/tabular_codec.hpp"

namespace augmentor {

class RemoteGenerator;

enum class FeatureKind { remote_latent, downsample_pca };

struct FeatureSpec {
  FeatureKind kind = FeatureKind::downsample_pca;
  Index downsample_height = 16;
  Index downsample_width = 16;
  Index pca_dims = 32;
  bool standardize = true;

  void validate() const;
};

/// Nearest-neighbour resample to (height, width), flattened row-major.
Vector downsample_flatten(const GrayImage& image, Index height, Index width);

/// Built-in stand-in for a VAE latent map: downsample, project onto a PCA
/// basis, standardize. The basis and the standardization statistics come
/// from the reference (original) images only; transform() never refits.
class PcaFeatureMap {
 public:
  static PcaFeatureMap fit(const std::vector<GrayImage>& reference, const FeatureSpec& spec);

  [[nodiscard]] SampleSet transform(const std::vector<GrayImage>& images) const;

  [[nodiscard]] const Matrix& basis() const { return basis_; }
  [[nodiscard]] const Vector& center() const { return center_; }

 private:
  FeatureSpec spec_;
  Vector center_;
  Matrix basis_;  // flattened_size x pca_dims, orthonormal columns
  Vector feature_mean_;
  Vector feature_scale_;
};

/// Features for the original and the generated images under one fixed map.
/// remote_latent needs `service`; downsample_pca ignores it.
std::pair<SampleSet, SampleSet> extract_features(const std::vector<GrayImage>& originals,
                                                 const std::vector<GrayImage>& generated,
                                                 const FeatureSpec& spec,
                                                 const RemoteGenerator* service = nullptr);

}  // namespace augmentor
