#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "parkvision/backend.hpp"

namespace parkvision {

struct RemoteConfig {
  std::string endpoint;         // e.g. "http://127.0.0.1:8080"
  std::string path = "/detect";
  double timeout_s = 30.0;
  std::string bearer_token;     // optional Authorization header
  std::string model_id = "remote";
  int jpeg_quality = 90;
};

/// Cloud-scenario backend: POSTs the image as JPEG bytes and expects a
/// JSON body {"model_id": ..., "inference_ms": ..., "detections":
/// [{"class","confidence","box"}]}. Unreachable endpoints and timeouts
/// are retryable; protocol violations are not. Requests to one endpoint
/// are serialized (at most one in flight).
class RemoteBackend : public DetectorBackend {
public:
  explicit RemoteBackend(RemoteConfig config);
  ~RemoteBackend() override;

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer& image, const std::string& image_id) override;

  /// Server-reported inference time of the last successful call, ms.
  double last_inference_ms() const { return last_inference_ms_; }

private:
  RemoteConfig config_;
  BackendDescriptor descriptor_;
  std::mutex in_flight_;
  double last_inference_ms_ = 0.0;

  struct ClientHandle;  // keeps httplib out of this header
  std::unique_ptr<ClientHandle> client_;
};

}  // namespace parkvision
