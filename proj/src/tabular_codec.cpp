#include "augmentor/tabular_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

constexpr double kMaxExponent = 700.0;

double quantize(double p, int bits) {
  if (bits <= 0) return p;
  const double levels = std::ldexp(1.0, bits) - 1.0;
  return std::round(p * levels) / levels;
}

}  // namespace

GrayImage::GrayImage(Matrix pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() < 1 || pixels_.cols() < 1) {
    throw std::invalid_argument("GrayImage must have positive dimensions");
  }
  if (!pixels_.allFinite() || pixels_.minCoeff() < 0.0 || pixels_.maxCoeff() > 1.0) {
    throw std::invalid_argument("GrayImage pixels must lie in [0, 1]");
  }
}

std::string to_string(MappingKind kind) {
  return kind == MappingKind::exponential ? "exponential" : "minmax";
}

MappingKind mapping_kind_from_string(const std::string& name) {
  if (name == "exponential") return MappingKind::exponential;
  if (name == "minmax") return MappingKind::minmax;
  throw std::invalid_argument("unknown mapping_kind '" + name + "'");
}

std::pair<DataMatrix, DataMatrix> partition(const DataMatrix& data, double fraction,
                                            std::uint64_t seed, bool shuffle) {
  const Index n = data.rows();
  if (n < 2) throw std::invalid_argument("partition needs at least 2 rows");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("partition fraction must lie in (0, 1)");
  }
  const auto first = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
  if (first == 0 || first == n) {
    throw std::invalid_argument("partition fraction leaves one part empty");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  const std::vector<Index> head(order.begin(), order.begin() + first);
  const std::vector<Index> tail(order.begin() + first, order.end());
  return {data.select_rows(head), data.select_rows(tail)};
}

Encoded encode(const DataMatrix& data, const EncodeOptions& options) {
  if (options.mapping_kind == MappingKind::exponential && !(options.exp_coefficient > 0.0)) {
    throw std::invalid_argument("exp_coefficient must be positive");
  }
  if (options.quantization_bits != 0 && options.quantization_bits != 8) {
    throw std::invalid_argument("quantization_bits must be 0 or 8");
  }
  const Matrix& v = data.values();
  Matrix w = v;
  if (options.mapping_kind == MappingKind::exponential) {
    const double a = options.exp_coefficient;
    if ((a * v.array()).abs().maxCoeff() > kMaxExponent) {
      throw std::invalid_argument("exponential mapping would overflow (|a*v| > 700)");
    }
    w = (a * v.array()).exp().matrix();
  }

  CodecManifest manifest;
  manifest.mapping_kind = options.mapping_kind;
  manifest.exp_coefficient = options.exp_coefficient;
  manifest.quantization_bits = options.quantization_bits;
  manifest.layout = {data.rows(), data.cols(), data.response_col()};
  manifest.per_column.reserve(static_cast<std::size_t>(data.cols()));

  Matrix pixels(data.rows(), data.cols());
  for (Index c = 0; c < data.cols(); ++c) {
    const double lo = w.col(c).minCoeff();
    const double hi = w.col(c).maxCoeff();
    manifest.per_column.push_back({lo, hi});
    for (Index r = 0; r < data.rows(); ++r) {
      const double p = hi > lo ? (w(r, c) - lo) / (hi - lo) : 0.5;
      pixels(r, c) = quantize(std::clamp(p, 0.0, 1.0), options.quantization_bits);
    }
  }
  return {GrayImage(std::move(pixels)), std::move(manifest)};
}

DataMatrix decode(const GrayImage& image, const CodecManifest& manifest,
                  DecodeWarnings* warnings) {
  if (image.height() != manifest.layout.rows || image.width() != manifest.layout.cols ||
      static_cast<Index>(manifest.per_column.size()) != manifest.layout.cols) {
    throw std::invalid_argument("image dimensions do not match the codec manifest");
  }
  DecodeWarnings local;
  const bool exponential = manifest.mapping_kind == MappingKind::exponential;
  const double a = manifest.exp_coefficient;
  Matrix v(image.height(), image.width());
  for (Index c = 0; c < image.width(); ++c) {
    const auto& range = manifest.per_column[static_cast<std::size_t>(c)];
    const bool constant = !(range.col_max > range.col_min);
    for (Index r = 0; r < image.height(); ++r) {
      double p = image.pixels()(r, c);
      if (p < 0.0 || p > 1.0) {
        p = std::clamp(p, 0.0, 1.0);
        ++local.clamped_pixels;
      }
      double w = constant ? range.col_min : p * (range.col_max - range.col_min) + range.col_min;
      if (exponential) {
        if (!(w > 0.0)) {
          w = std::numeric_limits<double>::min();
          ++local.log_underflow_cells;
        }
        v(r, c) = std::log(w) / a;
      } else {
        v(r, c) = w;
      }
    }
  }
  if (warnings) *warnings = local;
  return DataMatrix(std::move(v), manifest.layout.response_col);
}

DataMatrix binarize_response(const DataMatrix& data, double threshold) {
  Matrix v = data.values();
  const Index rc = data.response_col();
  for (Index r = 0; r < v.rows(); ++r) {
    const double y = v(r, rc);
    if (y < 0.0 || y > 1.0) throw std::invalid_argument("response outside [0, 1]");
    v(r, rc) = y > threshold ? 1.0 : 0.0;
  }
  return DataMatrix(std::move(v), rc, data.column_names());
}

}  // namespace augmentor
