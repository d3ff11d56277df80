#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "augmentor/tabular_codec.hpp"

namespace augmentor {

/// 8-bit grayscale PNG, row-major, height = image rows. Pixels are rounded
/// to k/255.
std::vector<std::uint8_t> encode_png(const GrayImage& image);

/// Accepts any PNG libpng can read. Colour images are reduced to gray by the
/// unweighted mean of the 8-bit RGB channels; alpha is dropped.
GrayImage decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const GrayImage& image, const std::string& path);
GrayImage read_png(const std::string& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace augmentor
