#include "parkvision/types.hpp"

#include <algorithm>
#include <cmath>

namespace parkvision {

namespace {

void check_image_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels, got " +
                                std::to_string(channels));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_image_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_image_shape(width, height, channels);
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (data_.size() != expected) {
    throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height) + "x" + std::to_string(channels));
  }
}

void ImageBuffer::set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t i = index(x, y, 0);
  if (channels_ == 1) {
    data_[i] = r;
    return;
  }
  data_[i] = r;
  data_[i + 1] = g;
  data_[i + 2] = b;
}

RoiMask::RoiMask(int width, int height, std::vector<bool> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("mask dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  const std::size_t expected = static_cast<std::size_t>(width) * height;
  if (bits_.size() != expected) {
    throw std::invalid_argument("mask bit count " + std::to_string(bits_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

RoiMask RoiMask::uniform(int width, int height, bool inside) {
  return RoiMask(width, height,
                 std::vector<bool>(static_cast<std::size_t>(width) * height, inside));
}

std::size_t RoiMask::roi_pixel_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

double RoiMask::roi_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(roi_pixel_count()) / static_cast<double>(bits_.size());
}

RoiMask RoiMask::intersect(const RoiMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) {
    throw std::invalid_argument("mask shapes differ: " + std::to_string(width_) + "x" +
                                std::to_string(height_) + " vs " +
                                std::to_string(other.width_) + "x" +
                                std::to_string(other.height_));
  }
  std::vector<bool> out(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] && other.bits_[i];
  return RoiMask(width_, height_, std::move(out));
}

BoundingBox BoundingBox::of(int ax, int ay, int bx, int by) {
  return BoundingBox{std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by)};
}

BoundingBox BoundingBox::clamped(int width, int height) const {
  auto clamp = [](int v, int hi) { return std::clamp(v, 0, hi); };
  return BoundingBox{clamp(x1, width), clamp(y1, height), clamp(x2, width), clamp(y2, height)};
}

bool BoundingBox::intersects(const BoundingBox& other) const {
  return x1 < other.x2 && other.x1 < x2 && y1 < other.y2 && other.y1 < y2;
}

double BoundingBox::iou(const BoundingBox& other) const {
  const int ix1 = std::max(x1, other.x1);
  const int iy1 = std::max(y1, other.y1);
  const int ix2 = std::min(x2, other.x2);
  const int iy2 = std::min(y2, other.y2);
  if (ix1 >= ix2 || iy1 >= iy2) return 0.0;
  const double inter = static_cast<double>(ix2 - ix1) * (iy2 - iy1);
  const double uni = static_cast<double>(area()) + static_cast<double>(other.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

void validate_detection(const Detection& det) {
  if (det.class_label.empty()) {
    throw std::invalid_argument("detection class label must not be empty");
  }
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    throw std::invalid_argument("confidence out of range [0,1]: " +
                                std::to_string(det.confidence));
  }
  if (det.box.x1 > det.box.x2 || det.box.y1 > det.box.y2) {
    throw std::invalid_argument("bounding box corners are not normalized");
  }
}

void validate_confusion(const ConfusionCounts& c) {
  if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) {
    throw std::invalid_argument("confusion counts must be non-negative");
  }
}

long long round_half_down(double v) {
  const double r = v >= 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5);
  return static_cast<long long>(r);
}

}  // namespace parkvision
