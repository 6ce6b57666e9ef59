#include "parkvision/detections_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace parkvision {

using nlohmann::json;

void DetectionSet::add(const std::string& image_id, Detection det) {
  auto it = groups_.find(image_id);
  if (it == groups_.end()) {
    order_.push_back(image_id);
    it = groups_.emplace(image_id, std::vector<Detection>{}).first;
  }
  it->second.push_back(std::move(det));
}

const std::vector<Detection>* DetectionSet::find(const std::string& image_id) const {
  auto it = groups_.find(image_id);
  return it == groups_.end() ? nullptr : &it->second;
}

std::size_t DetectionSet::total_detections() const {
  std::size_t n = 0;
  for (const auto& [id, dets] : groups_) n += dets.size();
  return n;
}

namespace {

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("detections line " + std::to_string(line_no) + ": " + what);
}

Detection parse_record(const json& rec, std::size_t line_no, std::string& image_id) {
  if (!rec.is_object()) line_error(line_no, "record is not a JSON object");
  if (!rec.contains("image") || !rec["image"].is_string()) {
    line_error(line_no, "missing string field 'image'");
  }
  if (!rec.contains("class") || !rec["class"].is_string()) {
    line_error(line_no, "missing string field 'class'");
  }
  if (!rec.contains("confidence") || !rec["confidence"].is_number()) {
    line_error(line_no, "missing numeric field 'confidence'");
  }
  if (!rec.contains("box") || !rec["box"].is_array() || rec["box"].size() != 4) {
    line_error(line_no, "field 'box' must be an array of 4 integers");
  }
  for (const auto& v : rec["box"]) {
    if (!v.is_number_integer()) line_error(line_no, "field 'box' must contain integers");
  }

  image_id = rec["image"].get<std::string>();
  Detection det;
  det.class_label = rec["class"].get<std::string>();
  det.confidence = rec["confidence"].get<double>();
  const auto& b = rec["box"];
  det.box = BoundingBox::of(b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>());

  if (image_id.empty()) line_error(line_no, "image id must not be empty");
  if (det.class_label.empty()) line_error(line_no, "class label must not be empty");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    line_error(line_no, "confidence out of range [0,1]: " + std::to_string(det.confidence));
  }
  return det;
}

}  // namespace

DetectionSet parse_detections(std::string_view text) {
  DetectionSet set;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                           : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    // tolerate trailing \r and blank lines
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(line_no, std::string("malformed record: ") + e.what());
    }
    std::string image_id;
    Detection det = parse_record(rec, line_no, image_id);
    set.add(image_id, std::move(det));
  }
  return set;
}

DetectionSet load_detections_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open detections file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_detections(buf.str());
}

std::string serialize_detections(const DetectionSet& set) {
  std::string out;
  for (const auto& image_id : set.image_order()) {
    for (const Detection& det : *set.find(image_id)) {
      json rec{{"image", image_id},
               {"class", det.class_label},
               {"confidence", det.confidence},
               {"box", {det.box.x1, det.box.y1, det.box.x2, det.box.y2}}};
      out += rec.dump();
      out += '\n';
    }
  }
  return out;
}

void save_detections_file(const DetectionSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write detections file: " + path.string());
  out << serialize_detections(set);
}

}  // namespace parkvision
