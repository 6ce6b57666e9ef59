#include "parkvision/roi.hpp"

#include <cmath>
#include <stdexcept>

namespace parkvision {

const std::set<std::string>& default_allowed_classes() {
  static const std::set<std::string> classes{"car", "truck"};
  return classes;
}

int luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<int>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

RoiMask load_mask(const ImageBuffer& image, int threshold) {
  if (image.empty()) throw std::invalid_argument("mask image is empty");
  if (threshold < 0 || threshold > 255) {
    throw std::invalid_argument("mask threshold must be in [0,255], got " +
                                std::to_string(threshold));
  }

  std::vector<bool> bits(image.pixel_count());
  std::size_t i = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x, ++i) {
      const int lum = image.channels() == 1
                          ? image.at(x, y, 0)
                          : luminance(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
      bits[i] = lum < threshold;
    }
  }

  RoiMask mask(image.width(), image.height(), std::move(bits));
  if (mask.roi_pixel_count() == 0) {
    throw std::runtime_error("empty ROI: no mask pixel is below the threshold");
  }
  return mask;
}

ImageBuffer apply_pre_mask(const ImageBuffer& image, const RoiMask& mask) {
  if (image.channels() != 3) {
    throw std::invalid_argument("pre-processing mask requires a 3-channel image, got " +
                                std::to_string(image.channels()) + " channel(s)");
  }
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw std::invalid_argument(
        "image and mask shapes differ: image " + std::to_string(image.width()) + "x" +
        std::to_string(image.height()) + " vs mask " + std::to_string(mask.width()) + "x" +
        std::to_string(mask.height()));
  }

  ImageBuffer out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!mask.bit(x, y)) out.set_rgb(x, y, kPreMaskGray, kPreMaskGray, kPreMaskGray);
    }
  }
  return out;
}

bool point_in_roi(const RoiMask& mask, long long x, long long y) {
  if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) return false;
  return mask.bit(static_cast<int>(x), static_cast<int>(y));
}

namespace {

std::pair<long long, long long> center_in_mask_space(const BoundingBox& box, const RoiMask& mask,
                                                     const std::optional<SourceSize>& space) {
  const auto [cx, cy] = box.center();
  if (!space || (space->width == mask.width() && space->height == mask.height())) {
    return {cx, cy};
  }
  if (space->width <= 0 || space->height <= 0) {
    throw std::invalid_argument("detection space dimensions must be positive");
  }
  const double sx = static_cast<double>(mask.width()) / space->width;
  const double sy = static_cast<double>(mask.height()) / space->height;
  return {round_half_down(cx * sx), round_half_down(cy * sy)};
}

}  // namespace

CountResult filter_detections(const std::vector<Detection>& detections, const RoiMask& mask,
                              const std::set<std::string>& allowed_classes,
                              std::optional<SourceSize> detection_space) {
  CountResult result;
  for (const Detection& det : detections) {
    if (!allowed_classes.contains(det.class_label)) continue;
    ++result.total_detections;
    const auto [mx, my] = center_in_mask_space(det.box, mask, detection_space);
    if (point_in_roi(mask, mx, my)) {
      ++result.in_roi_count;
      ++result.per_class_in_roi[det.class_label];
    }
  }
  return result;
}

CountResult count_all_detections(const std::vector<Detection>& detections,
                                 const std::set<std::string>& allowed_classes) {
  CountResult result;
  for (const Detection& det : detections) {
    if (!allowed_classes.contains(det.class_label)) continue;
    ++result.total_detections;
    ++result.in_roi_count;
    ++result.per_class_in_roi[det.class_label];
  }
  return result;
}

}  // namespace parkvision
