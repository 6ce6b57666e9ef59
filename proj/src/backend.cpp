#include "parkvision/backend.hpp"

#include <chrono>
#include <thread>

namespace parkvision {

int clamp_detections(std::vector<Detection>& detections, int width, int height) {
  int changed = 0;
  for (Detection& det : detections) {
    const BoundingBox clamped = det.box.clamped(width, height);
    if (clamped != det.box) {
      det.box = clamped;
      ++changed;
    }
  }
  return changed;
}

FixtureBackend::FixtureBackend(DetectionSet fixtures, std::string model_id)
    : fixtures_(std::move(fixtures)) {
  descriptor_.backend_id = "fixture";
  descriptor_.model_id = std::move(model_id);
}

std::vector<Detection> FixtureBackend::detect(const ImageBuffer& image,
                                              const std::string& image_id) {
  const std::vector<Detection>* dets = fixtures_.find(image_id);
  if (dets == nullptr) return {};
  std::vector<Detection> out = *dets;
  clamp_detections(out, image.width(), image.height());
  return out;
}

SleepBackend::SleepBackend(std::vector<double> pattern_ms, std::string model_id)
    : pattern_ms_(std::move(pattern_ms)) {
  if (pattern_ms_.empty()) throw std::invalid_argument("sleep pattern must not be empty");
  for (double ms : pattern_ms_) {
    if (ms < 0.0) throw std::invalid_argument("sleep durations must be non-negative");
  }
  descriptor_.backend_id = "sleep";
  descriptor_.model_id = std::move(model_id);
}

std::vector<Detection> SleepBackend::detect(const ImageBuffer&, const std::string&) {
  const double ms = pattern_ms_[calls_++ % pattern_ms_.size()];
  if (ms > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }
  return {};
}

void BackendRegistry::add(std::shared_ptr<DetectorBackend> backend) {
  if (!backend) throw std::invalid_argument("null backend");
  const std::string& id = backend->descriptor().backend_id;
  for (const auto& existing : backends_) {
    if (existing->descriptor().backend_id == id) {
      throw std::invalid_argument("duplicate backend id: " + id);
    }
  }
  backends_.push_back(std::move(backend));
}

std::shared_ptr<DetectorBackend> BackendRegistry::get(const std::string& backend_id) const {
  for (const auto& backend : backends_) {
    if (backend->descriptor().backend_id == backend_id) return backend;
  }
  throw std::invalid_argument("unknown backend id: " + backend_id);
}

std::vector<std::string> BackendRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(backends_.size());
  for (const auto& backend : backends_) out.push_back(backend->descriptor().backend_id);
  return out;
}

}  // namespace parkvision
