#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "parkvision/types.hpp"

namespace parkvision {

/// Ground-truth vehicle count for one image.
struct LabeledImage {
  std::string image_id;
  int vehicle_count = 0;

  bool operator==(const LabeledImage&) const = default;
};

/// Builds the occupancy record for one counting cycle:
/// vehicles = in_roi_count, free = max(0, capacity - vehicles).
OccupancyRecord make_occupancy_record(const CountResult& count, int capacity,
                                      const std::string& lot_id, std::int64_t timestamp,
                                      const std::string& model_id);

/// Maps per-image counts onto per-spot confusion tallies under the
/// maximal-overlap assumption: predicted-occupied spots are aligned
/// with truly occupied spots as far as they go, so the result is the
/// error-minimizing assignment and derived metrics are an upper bound.
/// Positive class is "empty space". predicted_vehicles is clamped to
/// capacity. tp+tn+fp+fn == capacity always holds.
ConfusionCounts confusion_from_counts(int label_vehicles, int predicted_vehicles, int capacity);

/// The seven metrics. Zero-denominator metrics come back as 0 and
/// flagged by name. Throws on an all-zero confusion.
MetricSet compute_metrics(const ConfusionCounts& confusion);

struct ImageEvaluation {
  std::string image_id;
  int label_vehicles = 0;
  int predicted_vehicles = 0;
  ConfusionCounts confusion;
};

struct EvaluationReport {
  int capacity = 0;
  ConfusionCounts aggregate;
  MetricSet metrics;
  std::vector<ImageEvaluation> rows;
};

/// Evaluates predictions against labels; the aggregate confusion is the
/// element-wise sum of per-image confusions. Every label must have a
/// prediction, otherwise the error lists the missing image ids.
EvaluationReport evaluate_dataset(const std::vector<LabeledImage>& labels,
                                  const std::map<std::string, CountResult>& predictions,
                                  int capacity);

struct LabelFilterResult {
  std::vector<LabeledImage> retained;
  std::size_t removed_count = 0;
  double removed_fraction = 0.0;
};

/// Keeps only images with at least one vehicle.
LabelFilterResult dataset_filter(const std::vector<LabeledImage>& labels);

/// Labels file: CSV rows image_id,vehicle_count with a header.
std::vector<LabeledImage> parse_labels_csv(std::string_view text);
std::vector<LabeledImage> load_labels_file(const std::filesystem::path& path);
std::string labels_to_csv(const std::vector<LabeledImage>& labels);

nlohmann::json metrics_to_json(const MetricSet& m);
nlohmann::json report_to_json(const EvaluationReport& report);
std::string report_rows_csv(const EvaluationReport& report);

/// One bar in the balanced-accuracy comparison chart.
struct MethodScore {
  std::string model_id;
  std::string method;  // "pre" or "post"
  double balanced_accuracy = 0.0;
};

/// SVG bar chart of balanced accuracy grouped by model and ROI method.
std::string balanced_accuracy_chart(const std::vector<MethodScore>& scores);

}  // namespace parkvision
