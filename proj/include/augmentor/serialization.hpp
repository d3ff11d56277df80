#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "augmentor/bound_check.hpp"
#include "augmentor/filters.hpp"
#include "augmentor/models.hpp"
#include "augmentor/pipeline.hpp"
#include "augmentor/tabular_codec.hpp"

namespace augmentor {

using Json = nlohmann::json;

/// Invalid or unreadable configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void to_json(Json& j, const CodecManifest& m);
void from_json(const Json& j, CodecManifest& m);

void to_json(Json& j, const FitResult& f);
void to_json(Json& j, const Metrics& m);
void to_json(Json& j, const SelectReport& r);
void to_json(Json& j, const DetectionResult& r);
void to_json(Json& j, const FilterReport& r);
void to_json(Json& j, const BoundReport& r);

void to_json(Json& j, const FilterPolicy& p);
void from_json(const Json& j, FilterPolicy& p);
void to_json(Json& j, const TransferConfig& c);
void from_json(const Json& j, TransferConfig& c);
void to_json(Json& j, const FeatureSpec& s);
void from_json(const Json& j, FeatureSpec& s);
void to_json(Json& j, const LossSpec& s);
void from_json(const Json& j, LossSpec& s);

void to_json(Json& j, const RunConfig& c);
/// Missing fields keep their defaults; wrong types and unknown enum names
/// raise ConfigError.
void from_json(const Json& j, RunConfig& c);
void to_json(Json& j, const RunManifest& m);

Json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const Json& j, const std::string& path);

RunConfig parse_run_config(const Json& j);

/// `<image>.manifest.json` sidecar.
void write_manifest(const CodecManifest& manifest, const std::string& path);
CodecManifest read_manifest(const std::string& path);

}  // namespace augmentor
