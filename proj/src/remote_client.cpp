#include "augmentor/remote_client.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "augmentor/png_io.hpp"

namespace augmentor {

namespace {

using nlohmann::json;

httplib::Client make_client(const RemoteOptions& options) {
  httplib::Client client(options.endpoint);
  const auto secs = static_cast<time_t>(options.timeout_seconds);
  const auto usecs = static_cast<time_t>((options.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  return client;
}

bool is_timeout(httplib::Error err) {
  return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
         err == httplib::Error::Write;
}

[[noreturn]] void raise_transport(httplib::Error err, const std::string& what) {
  const std::string msg = what + ": " + httplib::to_string(err);
  if (is_timeout(err)) throw GeneratorTimeout(msg);
  throw GeneratorUnavailable(msg);
}

void check_status(int status, const std::string& what, const std::string& body) {
  if (status == 200) return;
  if (status == 503) throw GeneratorUnavailable(what + ": service not ready");
  throw MalformedResponse(what + ": HTTP " + std::to_string(status) + " " + body.substr(0, 200));
}

json parse_body(const std::string& body, const std::string& what) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw MalformedResponse(what + ": response is not JSON (" + e.what() + ")");
  }
}

}  // namespace

RemoteGenerator::RemoteGenerator(RemoteOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw std::invalid_argument("remote endpoint is empty");
  if (options_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (options_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

HealthStatus RemoteGenerator::health() const {
  auto client = make_client(options_);
  auto res = client.Get("/health");
  if (!res) raise_transport(res.error(), "GET /health");
  const json body = parse_body(res->body, "GET /health");
  HealthStatus status;
  try {
    status.status = body.at("status").get<std::string>();
    status.model = body.value("model", std::string());
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("GET /health: ") + e.what());
  }
  return status;
}

std::string RemoteGenerator::post_json(const std::string& path, const std::string& body) const {
  auto client = make_client(options_);
  httplib::Error last = httplib::Error::Unknown;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    auto res = client.Post(path, body, "application/json");
    if (res) {
      check_status(res->status, "POST " + path, res->body);
      return res->body;
    }
    last = res.error();
  }
  raise_transport(last, "POST " + path);
}

GenResult RemoteGenerator::generate(const GenRequest& request, const std::string& request_id) const {
  request.validate();
  const json payload = {
      {"image_png_base64", base64_encode(encode_png(request.image))},
      {"prompt", request.prompt},
      {"strength", request.strength},
      {"guidance_scale", request.guidance_scale},
      {"seed", request.seed},
      {"request_id", request_id},
  };
  const std::string what = "POST /generate";
  const json body = parse_body(post_json("/generate", payload.dump()), what);
  GrayImage image;
  try {
    if (body.at("request_id").get<std::string>() != request_id) {
      throw MalformedResponse(what + ": request_id mismatch");
    }
    image = decode_png(base64_decode(body.at("image_png_base64").get<std::string>()));
  } catch (const json::exception& e) {
    throw MalformedResponse(what + ": " + e.what());
  } catch (const GeneratorError&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedResponse(what + ": bad image payload (" + e.what() + ")");
  }
  if (image.height() != request.image.height() || image.width() != request.image.width()) {
    throw DimensionMismatch(what + ": expected " + std::to_string(request.image.height()) + "x" +
                            std::to_string(request.image.width()) + ", got " +
                            std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  return GenResult{std::move(image), Backend::remote, request};
}

std::vector<GenResult> RemoteGenerator::generate_batch(const std::vector<GenRequest>& requests) const {
  std::vector<GenResult> results(requests.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        results[i] = generate(requests[i], "req-" + std::to_string(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(options_.max_in_flight),
                                               requests.size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

Latent RemoteGenerator::encode_latent(const GrayImage& image) const {
  const json payload = {{"image_png_base64", base64_encode(encode_png(image))}};
  const std::string what = "POST /encode-latent";
  const json body = parse_body(post_json("/encode-latent", payload.dump()), what);
  Latent latent;
  try {
    latent.values = body.at("latent").get<std::vector<double>>();
    latent.shape = body.at("shape").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw MalformedResponse(what + ": " + e.what());
  }
  std::size_t expected = 1;
  for (const int d : latent.shape) expected *= static_cast<std::size_t>(std::max(d, 0));
  if (latent.shape.size() != 3 || expected != latent.values.size()) {
    throw MalformedResponse(what + ": latent length does not match shape");
  }
  return latent;
}

GenResult generate_remote(const std::string& endpoint, const GenRequest& request,
                          double timeout_seconds) {
  RemoteGenerator client(RemoteOptions{endpoint, timeout_seconds});
  const auto status = client.health();
  if (!status.ready()) throw GeneratorUnavailable("service reports status '" + status.status + "'");
  return client.generate(request, "req-0");
}

}  // namespace augmentor
