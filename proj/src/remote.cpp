#include "parkvision/remote.hpp"

#include <chrono>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "parkvision/image_io.hpp"

namespace parkvision {

using nlohmann::json;

struct RemoteBackend::ClientHandle {
  explicit ClientHandle(const RemoteConfig& config) : client(config.endpoint) {
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(config.timeout_s));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (!config.bearer_token.empty()) {
      client.set_bearer_token_auth(config.bearer_token);
    }
  }
  httplib::Client client;
};

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw std::invalid_argument("remote endpoint must be set");
  descriptor_.backend_id = "remote:" + config_.endpoint;
  descriptor_.model_id = config_.model_id;
  descriptor_.serial = true;
  client_ = std::make_unique<ClientHandle>(config_);
}

RemoteBackend::~RemoteBackend() = default;

std::vector<Detection> RemoteBackend::detect(const ImageBuffer& image,
                                             const std::string& image_id) {
  std::lock_guard lock(in_flight_);

  const std::vector<std::uint8_t> jpeg = encode_jpeg(image, config_.jpeg_quality);
  httplib::Headers headers;
  if (!image_id.empty()) headers.emplace("X-Image-Id", image_id);

  auto res = client_->client.Post(config_.path, headers,
                                  reinterpret_cast<const char*>(jpeg.data()), jpeg.size(),
                                  "image/jpeg");
  if (!res) {
    throw BackendError("remote backend unreachable (" + config_.endpoint +
                           "): " + httplib::to_string(res.error()),
                       /*retryable=*/true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("remote backend returned status " + std::to_string(res->status),
                       /*retryable=*/false);
  }

  json doc;
  try {
    doc = json::parse(res->body);
  } catch (const json::parse_error& e) {
    const std::string excerpt = res->body.substr(0, 120);
    throw BackendError(std::string("malformed backend response: ") + e.what() + "; payload: " +
                           excerpt,
                       /*retryable=*/false);
  }

  std::vector<Detection> out;
  try {
    if (doc.contains("model_id") && doc["model_id"].is_string()) {
      descriptor_.model_id = doc["model_id"].get<std::string>();
    }
    if (doc.contains("inference_ms") && doc["inference_ms"].is_number()) {
      last_inference_ms_ = doc["inference_ms"].get<double>();
    }
    for (const auto& rec : doc.at("detections")) {
      Detection det;
      det.class_label = rec.at("class").get<std::string>();
      det.confidence = rec.at("confidence").get<double>();
      const auto& b = rec.at("box");
      det.box = BoundingBox::of(b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
                                b.at(3).get<int>());
      validate_detection(det);
      out.push_back(std::move(det));
    }
  } catch (const std::exception& e) {
    const std::string excerpt = res->body.substr(0, 120);
    throw BackendError(std::string("malformed backend response: ") + e.what() + "; payload: " +
                           excerpt,
                       /*retryable=*/false);
  }

  const int clamped = clamp_detections(out, image.width(), image.height());
  if (clamped > 0) {
    std::cerr << "warning: remote backend returned " << clamped
              << " box(es) outside image bounds; clamped\n";
  }
  return out;
}

}  // namespace parkvision
