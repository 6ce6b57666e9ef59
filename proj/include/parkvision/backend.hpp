#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "parkvision/detections_io.hpp"
#include "parkvision/types.hpp"

namespace parkvision {

struct BackendDescriptor {
  std::string backend_id;
  std::string model_id;
  bool expects_pre_masked = false;
  /// Serial backends must not receive concurrent detect calls; the
  /// pipeline serializes them.
  bool serial = false;
};

/// Backend failures carry whether a retry can reasonably succeed
/// (unreachable endpoint: yes; malformed response: no).
class BackendError : public std::runtime_error {
public:
  BackendError(const std::string& what, bool retryable)
      : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

private:
  bool retryable_;
};

/// Source of detections per image. Detections are reported in the
/// coordinate space of the input image; implementations clamp boxes to
/// image bounds. The image id is metadata for replay-style backends and
/// may be empty for live ones.
class DetectorBackend {
public:
  virtual ~DetectorBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual std::vector<Detection> detect(const ImageBuffer& image, const std::string& image_id) = 0;
};

/// Clamps every box to [0,width]x[0,height]; returns how many boxes
/// actually changed.
int clamp_detections(std::vector<Detection>& detections, int width, int height);

/// Replays detections recorded in a fixture file, keyed by image id.
/// Unknown ids yield an empty list.
class FixtureBackend : public DetectorBackend {
public:
  explicit FixtureBackend(DetectionSet fixtures, std::string model_id = "fixture");

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer& image, const std::string& image_id) override;

private:
  DetectionSet fixtures_;
  BackendDescriptor descriptor_;
};

/// Detects nothing but sleeps a configurable pattern per call, cycled
/// by call index. Used to exercise the benchmark harness with a known
/// latency distribution.
class SleepBackend : public DetectorBackend {
public:
  explicit SleepBackend(std::vector<double> pattern_ms, std::string model_id = "sleep");

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer& image, const std::string& image_id) override;

private:
  std::vector<double> pattern_ms_;
  std::size_t calls_ = 0;
  BackendDescriptor descriptor_;
};

/// Backend instances by id; ids must be unique.
class BackendRegistry {
public:
  void add(std::shared_ptr<DetectorBackend> backend);
  std::shared_ptr<DetectorBackend> get(const std::string& backend_id) const;
  std::vector<std::string> ids() const;

private:
  std::vector<std::shared_ptr<DetectorBackend>> backends_;
};

}  // namespace parkvision
