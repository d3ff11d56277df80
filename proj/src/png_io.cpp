#include "augmentor/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <openssl/evp.h>
#include <png.h>

namespace augmentor {

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  const auto height = static_cast<std::size_t>(image.height());
  const auto width = static_cast<std::size_t>(image.width());
  std::vector<std::uint8_t> raw(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double p =
          std::clamp(image.pixels()(static_cast<Index>(r), static_cast<Index>(c)), 0.0, 1.0);
      raw[r * width + c] = static_cast<std::uint8_t>(std::lround(p * 255.0));
    }
  }
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(width);
  desc.height = static_cast<png_uint_32>(height);
  desc.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw std::runtime_error(std::string("PNG decode failed: ") + desc.message);
  }
  const bool colour = (desc.format & PNG_FORMAT_FLAG_COLOR) != 0;
  desc.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = colour ? 3 : 1;
  const std::size_t width = desc.width;
  const std::size_t height = desc.height;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw std::runtime_error(std::string("PNG decode failed: ") + desc.message);
  }
  Matrix pixels(static_cast<Index>(height), static_cast<Index>(width));
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::uint8_t* px = raw.data() + (r * width + c) * channels;
      double level = px[0];
      if (colour) level = std::round((px[0] + px[1] + px[2]) / 3.0);
      pixels(static_cast<Index>(r), static_cast<Index>(c)) = level / 255.0;
    }
  }
  return GrayImage(std::move(pixels));
}

void write_png(const GrayImage& image, const std::string& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

GrayImage read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (const char ch : text) {
    if (ch != '\n' && ch != '\r' && ch != ' ') clean.push_back(ch);
  }
  if (clean.size() % 4 != 0) throw std::runtime_error("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * clean.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw std::runtime_error("invalid base64 payload");
  // EVP_DecodeBlock keeps the padding bytes as zeros.
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace augmentor
