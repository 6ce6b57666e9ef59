#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parkvision/types.hpp"

namespace parkvision {

/// Binarization threshold for mask images: a pixel is inside the ROI
/// iff its luminance is strictly below this value (black marks the
/// monitored region).
inline constexpr int kDefaultMaskThreshold = 128;

/// Fill value written outside the ROI by the pre-processing approach,
/// applied to all three color channels.
inline constexpr std::uint8_t kPreMaskGray = 128;

/// Vehicle classes counted by default.
const std::set<std::string>& default_allowed_classes();

/// Integer luminance of an RGB triple, round(0.299 R + 0.587 G + 0.114 B).
int luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Binarizes a grayscale or RGB mask image: inside the ROI iff
/// luminance < threshold. Rejects masks with an empty ROI.
RoiMask load_mask(const ImageBuffer& image, int threshold = kDefaultMaskThreshold);

/// Returns a copy of the image with every pixel outside the ROI set to
/// gray (128,128,128) and every ROI pixel bit-identical to the input.
/// The image must have 3 channels and match the mask shape.
ImageBuffer apply_pre_mask(const ImageBuffer& image, const RoiMask& mask);

/// True iff (x, y) is in bounds and the mask bit is set. Total:
/// out-of-bounds points are simply outside the ROI.
bool point_in_roi(const RoiMask& mask, long long x, long long y);

/// Dimensions of the coordinate space detections were reported in,
/// when it differs from the mask (a detector that resized the image).
struct SourceSize {
  int width = 0;
  int height = 0;
};

/// Post-processing filter: counts detections of the allowed classes
/// whose box center lands on an ROI pixel. total_detections counts
/// allowed-class detections regardless of position. When detection_space
/// is given and differs from the mask shape, centers are rescaled
/// linearly to mask coordinates before lookup.
CountResult filter_detections(const std::vector<Detection>& detections, const RoiMask& mask,
                              const std::set<std::string>& allowed_classes = default_allowed_classes(),
                              std::optional<SourceSize> detection_space = std::nullopt);

/// Counts every allowed-class detection as in-ROI. This is the counting
/// rule of the pre-processing approach, where the detector only ever
/// sees the masked image.
CountResult count_all_detections(const std::vector<Detection>& detections,
                                 const std::set<std::string>& allowed_classes = default_allowed_classes());

}  // namespace parkvision
