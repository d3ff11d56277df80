#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "augmentor/tabular_codec.hpp"

namespace augmentor {

inline constexpr double kMinStrength = 0.001;
inline constexpr double kMaxStrength = 1.0;
/// Below this strength the surrogate returns its input unchanged.
inline constexpr double kIdentityStrength = 0.002;

struct GenRequest {
  GrayImage image;
  std::string prompt;
  double strength = 0.01;
  double guidance_scale = 7.5;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a strength outside [0.001, 1] or a
  /// non-positive guidance scale.
  void validate() const;
};

enum class Backend { surrogate, remote };

std::string to_string(Backend backend);

struct GenResult {
  GrayImage image;
  Backend backend = Backend::surrogate;
  GenRequest request_echo;
};

/// Inclusive arithmetic grid start, start+step, ... not exceeding stop
/// (up to float drift). Values are rounded to 1e-9.
std::vector<double> strength_grid(double start, double stop, double step);

/// Deterministic stand-in for img2img generation:
///   out = clamp01((1 - k) * in + k * eta)
/// where eta is Gaussian noise with each column's mean and standard deviation,
/// smoothed by a 3x1 vertical moving average. Strengths below 0.002 return
/// the input bit-exactly.
GenResult generate_surrogate(const GenRequest& request);

/// Base class for failures of the remote generation backend.
class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Service could not be reached (connection refused, DNS, not ready).
class GeneratorUnavailable : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

class GeneratorTimeout : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

class MalformedResponse : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

class DimensionMismatch : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

}  // namespace augmentor
