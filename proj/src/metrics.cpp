#include "parkvision/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "parkvision/svg.hpp"

namespace parkvision {

OccupancyRecord make_occupancy_record(const CountResult& count, int capacity,
                                      const std::string& lot_id, std::int64_t timestamp,
                                      const std::string& model_id) {
  if (capacity <= 0) {
    throw std::invalid_argument("lot capacity must be positive, got " + std::to_string(capacity));
  }
  OccupancyRecord rec;
  rec.lot_id = lot_id;
  rec.timestamp = timestamp;
  rec.capacity = capacity;
  rec.vehicles = count.in_roi_count;
  rec.free = std::max(0, capacity - count.in_roi_count);
  rec.model_id = model_id;
  return rec;
}

ConfusionCounts confusion_from_counts(int label_vehicles, int predicted_vehicles, int capacity) {
  if (capacity <= 0) {
    throw std::invalid_argument("capacity must be positive, got " + std::to_string(capacity));
  }
  if (label_vehicles < 0 || label_vehicles > capacity) {
    throw std::invalid_argument("label vehicle count " + std::to_string(label_vehicles) +
                                " outside [0, capacity=" + std::to_string(capacity) + "]");
  }
  if (predicted_vehicles < 0) {
    throw std::invalid_argument("predicted vehicle count must be non-negative");
  }

  const std::int64_t cap = capacity;
  const std::int64_t lab = label_vehicles;
  const std::int64_t pred = std::min<std::int64_t>(predicted_vehicles, cap);

  ConfusionCounts c;
  if (pred <= lab) {
    c.tn = pred;
    c.fp = lab - pred;
    c.tp = cap - lab;
    c.fn = 0;
  } else {
    c.tn = lab;
    c.fn = pred - lab;
    c.tp = cap - pred;
    c.fp = 0;
  }
  return c;
}

MetricSet compute_metrics(const ConfusionCounts& confusion) {
  validate_confusion(confusion);
  if (confusion.total() == 0) {
    throw std::invalid_argument("cannot compute metrics from an all-zero confusion matrix");
  }

  const double tp = static_cast<double>(confusion.tp);
  const double tn = static_cast<double>(confusion.tn);
  const double fp = static_cast<double>(confusion.fp);
  const double fn = static_cast<double>(confusion.fn);

  MetricSet m;
  auto ratio = [&m](double numer, double denom, const char* name) {
    if (denom == 0.0) {
      m.zero_denominator.emplace_back(name);
      return 0.0;
    }
    return numer / denom;
  };

  m.accuracy = ratio(tp + tn, tp + fp + tn + fn, "accuracy");
  m.precision = ratio(tp, tp + fp, "precision");
  m.recall = ratio(tp, tp + fn, "recall");
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, "f1");
  m.sensitivity = ratio(tp, tp + fn, "sensitivity");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.balanced_accuracy = (m.sensitivity + m.specificity) / 2.0;
  return m;
}

EvaluationReport evaluate_dataset(const std::vector<LabeledImage>& labels,
                                  const std::map<std::string, CountResult>& predictions,
                                  int capacity) {
  if (labels.empty()) throw std::invalid_argument("label list is empty");

  std::vector<std::string> missing;
  for (const auto& label : labels) {
    if (!predictions.contains(label.image_id)) missing.push_back(label.image_id);
  }
  if (!missing.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i) joined += ", ";
      joined += missing[i];
    }
    throw std::runtime_error("missing predictions for " + std::to_string(missing.size()) +
                             " labeled image(s): " + joined);
  }

  EvaluationReport report;
  report.capacity = capacity;
  report.rows.reserve(labels.size());
  for (const auto& label : labels) {
    const CountResult& count = predictions.at(label.image_id);
    ImageEvaluation row;
    row.image_id = label.image_id;
    row.label_vehicles = label.vehicle_count;
    row.predicted_vehicles = count.in_roi_count;
    row.confusion = confusion_from_counts(label.vehicle_count, count.in_roi_count, capacity);
    report.aggregate += row.confusion;
    report.rows.push_back(std::move(row));
  }
  report.metrics = compute_metrics(report.aggregate);
  return report;
}

LabelFilterResult dataset_filter(const std::vector<LabeledImage>& labels) {
  LabelFilterResult result;
  for (const auto& label : labels) {
    if (label.vehicle_count >= 1) {
      result.retained.push_back(label);
    } else {
      ++result.removed_count;
    }
  }
  result.removed_fraction =
      labels.empty() ? 0.0 : static_cast<double>(result.removed_count) / labels.size();
  return result;
}

namespace {

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

}  // namespace

std::vector<LabeledImage> parse_labels_csv(std::string_view text) {
  std::vector<LabeledImage> labels;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      // require the documented header
      std::string lowered = line;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      lowered.erase(std::remove(lowered.begin(), lowered.end(), ' '), lowered.end());
      if (lowered != "image_id,vehicle_count") {
        throw std::runtime_error("labels line 1: expected header 'image_id,vehicle_count'");
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("labels line " + std::to_string(line_no) + ": expected 2 columns");
    }
    LabeledImage label;
    label.image_id = trim(line.substr(0, comma));
    const std::string count_str = trim(line.substr(comma + 1));
    try {
      std::size_t used = 0;
      label.vehicle_count = std::stoi(count_str, &used);
      if (used != count_str.size()) throw std::invalid_argument(count_str);
    } catch (const std::exception&) {
      throw std::runtime_error("labels line " + std::to_string(line_no) +
                               ": vehicle_count is not an integer: '" + count_str + "'");
    }
    if (label.image_id.empty()) {
      throw std::runtime_error("labels line " + std::to_string(line_no) + ": empty image id");
    }
    if (label.vehicle_count < 0) {
      throw std::runtime_error("labels line " + std::to_string(line_no) +
                               ": vehicle_count must be >= 0");
    }
    labels.push_back(std::move(label));
  }
  if (!header_seen) throw std::runtime_error("labels file is empty");
  return labels;
}

std::vector<LabeledImage> load_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open labels file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels_csv(buf.str());
}

std::string labels_to_csv(const std::vector<LabeledImage>& labels) {
  std::string out = "image_id,vehicle_count\n";
  for (const auto& label : labels) {
    out += label.image_id + "," + std::to_string(label.vehicle_count) + "\n";
  }
  return out;
}

nlohmann::json metrics_to_json(const MetricSet& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"sensitivity", m.sensitivity},
          {"specificity", m.specificity},
          {"balanced_accuracy", m.balanced_accuracy},
          {"zero_denominator", m.zero_denominator}};
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"image", row.image_id},
                    {"label_vehicles", row.label_vehicles},
                    {"predicted_vehicles", row.predicted_vehicles},
                    {"tp", row.confusion.tp},
                    {"tn", row.confusion.tn},
                    {"fp", row.confusion.fp},
                    {"fn", row.confusion.fn}});
  }
  return {{"capacity", report.capacity},
          {"images", report.rows.size()},
          {"confusion",
           {{"tp", report.aggregate.tp},
            {"tn", report.aggregate.tn},
            {"fp", report.aggregate.fp},
            {"fn", report.aggregate.fn}}},
          {"metrics", metrics_to_json(report.metrics)},
          {"per_image", rows}};
}

std::string report_rows_csv(const EvaluationReport& report) {
  std::string out = "image_id,label_vehicles,predicted_vehicles,tp,tn,fp,fn\n";
  for (const auto& row : report.rows) {
    out += row.image_id + "," + std::to_string(row.label_vehicles) + "," +
           std::to_string(row.predicted_vehicles) + "," + std::to_string(row.confusion.tp) + "," +
           std::to_string(row.confusion.tn) + "," + std::to_string(row.confusion.fp) + "," +
           std::to_string(row.confusion.fn) + "\n";
  }
  return out;
}

std::string balanced_accuracy_chart(const std::vector<MethodScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("no scores to chart");

  std::vector<std::string> methods;
  std::vector<std::string> models;
  for (const auto& s : scores) {
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) {
      methods.push_back(s.method);
    }
    if (std::find(models.begin(), models.end(), s.model_id) == models.end()) {
      models.push_back(s.model_id);
    }
  }

  std::vector<svg::BarGroup> groups;
  for (const auto& model : models) {
    svg::BarGroup group{model, std::vector<double>(methods.size(), 0.0)};
    for (const auto& s : scores) {
      if (s.model_id != model) continue;
      const auto it = std::find(methods.begin(), methods.end(), s.method);
      group.values[static_cast<std::size_t>(it - methods.begin())] = s.balanced_accuracy;
    }
    groups.push_back(std::move(group));
  }
  return svg::grouped_bar_chart("Balanced accuracy by model and ROI method", "balanced accuracy",
                                methods, groups, 0.0, 1.0);
}

}  // namespace parkvision
