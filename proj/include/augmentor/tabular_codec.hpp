#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "augmentor/data_matrix.hpp"

namespace augmentor {

/// Pixel grid with intensities in [0, 1]; rows = height, cols = width.
class GrayImage {
 public:
  GrayImage() = default;
  explicit GrayImage(Matrix pixels);

  [[nodiscard]] const Matrix& pixels() const { return pixels_; }
  [[nodiscard]] Index height() const { return pixels_.rows(); }
  [[nodiscard]] Index width() const { return pixels_.cols(); }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           a.pixels_ == b.pixels_;
  }

 private:
  Matrix pixels_;
};

enum class MappingKind { exponential, minmax };

std::string to_string(MappingKind kind);
MappingKind mapping_kind_from_string(const std::string& name);

struct ColumnRange {
  double col_min = 0.0;
  double col_max = 0.0;
};

struct CodecLayout {
  Index rows = 0;
  Index cols = 0;
  Index response_col = 0;
};

/// Everything decode needs to invert encode. For the exponential map the
/// column ranges live in the transformed (e^{a v}) domain.
struct CodecManifest {
  MappingKind mapping_kind = MappingKind::exponential;
  double exp_coefficient = 0.05;
  std::vector<ColumnRange> per_column;
  int quantization_bits = 8;
  CodecLayout layout;
};

struct EncodeOptions {
  MappingKind mapping_kind = MappingKind::exponential;
  double exp_coefficient = 0.05;
  int quantization_bits = 8;
};

struct Encoded {
  GrayImage image;
  CodecManifest manifest;
};

/// Counts of cells that needed repair while decoding generator output.
struct DecodeWarnings {
  std::size_t clamped_pixels = 0;
  std::size_t log_underflow_cells = 0;
};

/// Splits rows into a leading part of floor(fraction * n) rows and the rest.
/// With shuffle the rows are permuted by `seed` first.
std::pair<DataMatrix, DataMatrix> partition(const DataMatrix& data, double fraction,
                                            std::uint64_t seed, bool shuffle);

Encoded encode(const DataMatrix& data, const EncodeOptions& options = {});

/// Inverse of encode. Pixels outside [0, 1] are clamped; a non-positive
/// logarithm argument is replaced by the smallest positive double. Both are
/// counted in `warnings` when provided.
DataMatrix decode(const GrayImage& image, const CodecManifest& manifest,
                  DecodeWarnings* warnings = nullptr);

/// Response strictly above `threshold` becomes 1, everything else 0.
DataMatrix binarize_response(const DataMatrix& data, double threshold = 0.5);

}  // namespace augmentor
