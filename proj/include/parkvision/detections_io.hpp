#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parkvision/types.hpp"

namespace parkvision {

/// Detections grouped by image id. Groups keep the order of first
/// appearance in the source file; detections within a group keep file
/// order.
class DetectionSet {
public:
  void add(const std::string& image_id, Detection det);

  /// nullptr when the image id is unknown.
  const std::vector<Detection>* find(const std::string& image_id) const;

  const std::vector<std::string>& image_order() const { return order_; }
  std::size_t image_count() const { return order_.size(); }
  std::size_t total_detections() const;
  bool empty() const { return order_.empty(); }

private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<Detection>> groups_;
};

/// Parses the line-delimited detections format: one JSON object per
/// line with fields image (string), class (string), confidence (real
/// in [0,1]) and box ([x1,y1,x2,y2] integers). Unknown extra fields
/// are ignored. Errors name the offending line number.
DetectionSet parse_detections(std::string_view text);

DetectionSet load_detections_file(const std::filesystem::path& path);

/// Normalized form: one line per detection, groups in first-appearance
/// order, keys sorted. serialize(parse(x)) is a fixed point.
std::string serialize_detections(const DetectionSet& set);

void save_detections_file(const DetectionSet& set, const std::filesystem::path& path);

}  // namespace parkvision
