#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace parkvision {

/// 8-bit raster image, row-major, interleaved channels.
/// channels is 1 (grayscale) or 3 (RGB).
class ImageBuffer {
public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return data_[index(x, y, c)];
  }
  void set(int x, int y, int c, std::uint8_t value) { data_[index(x, y, c)] = value; }
  void set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }
  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  bool operator==(const ImageBuffer&) const = default;

private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Bilevel pixel grid marking the monitored region, one bit per pixel
/// (true = inside the ROI). Dimensions must match the images it is
/// applied to; that is checked where the mask is applied, not here.
class RoiMask {
public:
  RoiMask() = default;
  RoiMask(int width, int height, std::vector<bool> bits);

  /// Uniform mask, mostly useful in tests.
  static RoiMask uniform(int width, int height, bool inside);

  int width() const { return width_; }
  int height() const { return height_; }

  /// Raw bit lookup; (x, y) must be in bounds. Use point_in_roi() for
  /// the total, bounds-checked variant.
  bool bit(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }

  std::size_t roi_pixel_count() const;
  double roi_fraction() const;

  /// Bitwise AND with another mask of the same shape (shrinks the ROI).
  RoiMask intersect(const RoiMask& other) const;

  const std::vector<bool>& bits() const { return bits_; }

  bool operator==(const RoiMask&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<bool> bits_;
};

/// Axis-aligned box in pixel coordinates, origin top-left, x rightward,
/// y downward. Corners are normalized so x1 <= x2 and y1 <= y2.
struct BoundingBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  /// Builds a box from two corners in any order.
  static BoundingBox of(int ax, int ay, int bx, int by);

  /// Center pixel, rounded to nearest integer with ties toward zero.
  std::pair<int, int> center() const {
    return {(x1 + x2) / 2, (y1 + y2) / 2};
  }

  /// Clamps all coordinates into [0, width] x [0, height].
  BoundingBox clamped(int width, int height) const;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long long area() const { return static_cast<long long>(width()) * height(); }

  bool intersects(const BoundingBox& other) const;
  double iou(const BoundingBox& other) const;

  bool operator==(const BoundingBox&) const = default;
};

/// One detected object as reported by a detector backend.
struct Detection {
  std::string class_label;
  double confidence = 0.0;  // in [0, 1]
  BoundingBox box;

  bool operator==(const Detection&) const = default;
};

/// Throws std::invalid_argument if the detection breaks a domain invariant.
void validate_detection(const Detection& det);

/// Raw vs. in-ROI detection totals for one image.
struct CountResult {
  int total_detections = 0;
  int in_roi_count = 0;
  std::map<std::string, int> per_class_in_roi;

  bool operator==(const CountResult&) const = default;
};

/// Per-spot confusion tallies. Positive class is "empty space":
/// tp = correctly predicted empty, tn = correctly predicted vehicle,
/// fp = predicted empty but occupied, fn = predicted vehicle but empty.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& other) {
    tp += other.tp;
    tn += other.tn;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }

  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws std::invalid_argument if any tally is negative.
void validate_confusion(const ConfusionCounts& c);

/// The seven derived metrics. A metric whose denominator is zero is
/// defined as 0 and its name is listed in zero_denominator.
struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double balanced_accuracy = 0.0;
  std::vector<std::string> zero_denominator;
};

/// Timestamped lot occupancy, the only payload that ever leaves the
/// device in edge mode. Deliberately has no image field.
struct OccupancyRecord {
  std::string lot_id;
  std::int64_t timestamp = 0;  // UTC seconds
  int capacity = 0;
  int vehicles = 0;
  int free = 0;  // max(0, capacity - vehicles)
  std::string model_id;

  bool operator==(const OccupancyRecord&) const = default;
};

/// Benchmark summary: mean +/- sample std over the retained samples.
struct LatencyStats {
  int samples_used = 0;
  int discarded_warmup = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

/// Rounds to the nearest integer with ties toward zero, matching the
/// BoundingBox::center convention.
long long round_half_down(double v);

}  // namespace parkvision
