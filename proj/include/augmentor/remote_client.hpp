#pragma once

#include <string>
#include <vector>

#include "augmentor/generators.hpp"

namespace augmentor {

struct RemoteOptions {
  /// Base URL, e.g. "http://127.0.0.1:8000".
  std::string endpoint;
  double timeout_seconds = 60.0;
  /// Extra attempts after a transport failure.
  int max_retries = 3;
  /// Concurrent requests issued by generate_batch.
  int max_in_flight = 4;
};

struct HealthStatus {
  std::string status;
  std::string model;
  [[nodiscard]] bool ready() const { return status == "ready"; }
};

struct Latent {
  std::vector<double> values;
  /// [c, h, w]
  std::vector<int> shape;
};

/// Client for the diffusion service JSON protocol:
///   POST /generate       {image_png_base64, prompt, strength, guidance_scale, seed, request_id}
///   POST /encode-latent  {image_png_base64} -> {latent, shape}
///   GET  /health         -> {status, model}
/// Failures surface as the GeneratorError subclasses so callers can decide
/// whether to fall back to the surrogate.
class RemoteGenerator {
 public:
  explicit RemoteGenerator(RemoteOptions options);

  [[nodiscard]] HealthStatus health() const;

  /// Sends one request. The response must echo `request_id` and preserve
  /// the input dimensions.
  [[nodiscard]] GenResult generate(const GenRequest& request, const std::string& request_id) const;

  /// Issues requests with at most max_in_flight outstanding; results are
  /// returned in request order regardless of completion order.
  [[nodiscard]] std::vector<GenResult> generate_batch(const std::vector<GenRequest>& requests) const;

  [[nodiscard]] Latent encode_latent(const GrayImage& image) const;

  [[nodiscard]] const RemoteOptions& options() const { return options_; }

 private:
  std::string post_json(const std::string& path, const std::string& body) const;

  RemoteOptions options_;
};

/// Probes /health and sends a single generation request.
GenResult generate_remote(const std::string& endpoint, const GenRequest& request,
                          double timeout_seconds = 60.0);

}  // namespace augmentor
