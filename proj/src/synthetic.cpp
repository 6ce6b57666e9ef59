#include "parkvision/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "parkvision/roi.hpp"

namespace parkvision {

namespace {

struct Rgb {
  int r, g, b;
};

// Palettes are chosen so no rendered pixel can come out as the exact
// pre-mask gray (128,128,128), keeping gray_fraction() unambiguous.
constexpr Rgb kAsphalt{58, 60, 63};
constexpr Rgb kLotSurface{70, 72, 75};
constexpr Rgb kLine{232, 232, 238};
constexpr Rgb kCarPalette[] = {{196, 48, 44}, {52, 86, 196},  {232, 232, 238},
                               {34, 36, 40},  {186, 146, 52}, {88, 158, 96}};

std::uint8_t jitter_channel(int base, int amount, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-amount, amount);
  return static_cast<std::uint8_t>(std::clamp(base + d(rng), 0, 255));
}

void fill_rect(ImageBuffer& img, const BoundingBox& box, Rgb color, int jitter,
               std::mt19937_64& rng) {
  const BoundingBox r = box.clamped(img.width(), img.height());
  for (int y = r.y1; y < r.y2; ++y) {
    for (int x = r.x1; x < r.x2; ++x) {
      img.set_rgb(x, y, jitter_channel(color.r, jitter, rng), jitter_channel(color.g, jitter, rng),
                  jitter_channel(color.b, jitter, rng));
    }
  }
}

bool near(int a, int b, int tol = 4) { return std::abs(a - b) <= tol; }

}  // namespace

void validate_scene_spec(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw std::invalid_argument("scene dimensions must be positive");
  }
  for (std::size_t i = 0; i < spec.spots.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.spots.size(); ++j) {
      if (spec.spots[i].intersects(spec.spots[j])) {
        throw std::invalid_argument("overlapping spots: #" + std::to_string(i) + " and #" +
                                    std::to_string(j));
      }
    }
  }
  std::vector<bool> seen(spec.spots.size(), false);
  for (int idx : spec.occupied) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= spec.spots.size()) {
      throw std::invalid_argument("occupied index out of range: " + std::to_string(idx));
    }
    if (seen[idx]) throw std::invalid_argument("duplicate occupied index: " + std::to_string(idx));
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < spec.distractors.size(); ++i) {
    if (spec.distractors[i].intersects(spec.lot_region)) {
      throw std::invalid_argument("distractor #" + std::to_string(i) +
                                  " intersects the lot region");
    }
  }
}

SyntheticScene render_scene(const SceneSpec& spec, std::uint64_t seed) {
  validate_scene_spec(spec);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

  SyntheticScene scene;
  scene.image = ImageBuffer(spec.width, spec.height, 3);
  fill_rect(scene.image, BoundingBox{0, 0, spec.width, spec.height}, kAsphalt, 5, rng);
  fill_rect(scene.image, spec.lot_region, kLotSurface, 4, rng);

  // painted lines around each spot
  for (const BoundingBox& spot : spec.spots) {
    fill_rect(scene.image, {spot.x1, spot.y1, spot.x2, spot.y1 + 1}, kLine, 4, rng);
    fill_rect(scene.image, {spot.x1, spot.y2 - 1, spot.x2, spot.y2}, kLine, 4, rng);
    fill_rect(scene.image, {spot.x1, spot.y1, spot.x1 + 1, spot.y2}, kLine, 4, rng);
    fill_rect(scene.image, {spot.x2 - 1, spot.y1, spot.x2, spot.y2}, kLine, 4, rng);
  }

  auto draw_vehicle = [&](const BoundingBox& box, const std::string& label) {
    const Rgb fill = kCarPalette[std::uniform_int_distribution<int>(
        0, std::size(kCarPalette) - 1)(rng)];
    fill_rect(scene.image, box, fill, 6, rng);
    // darker roof block
    const int rx = (box.x2 - box.x1) / 5;
    const int ry = (box.y2 - box.y1) / 5;
    const Rgb roof{static_cast<int>(fill.r * 0.62), static_cast<int>(fill.g * 0.62),
                   static_cast<int>(fill.b * 0.62)};
    fill_rect(scene.image, {box.x1 + rx, box.y1 + ry, box.x2 - rx, box.y2 - ry}, roof, 6, rng);

    Detection det;
    det.class_label = label;
    det.confidence = 0.90 + 0.09 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    det.box = box.clamped(spec.width, spec.height);
    scene.ground_truth.push_back(std::move(det));
  };

  std::uniform_int_distribution<int> overhang_dist(4, 12);
  for (int idx : spec.occupied) {
    const BoundingBox& spot = spec.spots[idx];
    BoundingBox car{spot.x1 + 3, spot.y1 + 3, spot.x2 - 3, spot.y2 - 3};
    // cars in boundary spots overhang the lot edge
    if (near(spot.y1, spec.lot_region.y1)) car.y1 = spec.lot_region.y1 - overhang_dist(rng);
    if (near(spot.y2, spec.lot_region.y2)) car.y2 = spec.lot_region.y2 + overhang_dist(rng);
    if (near(spot.x1, spec.lot_region.x1)) car.x1 = spec.lot_region.x1 - overhang_dist(rng);
    if (near(spot.x2, spec.lot_region.x2)) car.x2 = spec.lot_region.x2 + overhang_dist(rng);
    const bool truck = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.15;
    draw_vehicle(car.clamped(spec.width, spec.height), truck ? "truck" : "car");
  }
  for (const BoundingBox& box : spec.distractors) {
    draw_vehicle(box.clamped(spec.width, spec.height), "car");
  }

  scene.roi_vehicle_count = static_cast<int>(spec.occupied.size());
  return scene;
}

ImageBuffer lot_mask_image(const SceneSpec& spec, int inset) {
  ImageBuffer mask(spec.width, spec.height, 1);
  std::fill(mask.data().begin(), mask.data().end(), 255);
  const BoundingBox inner{spec.lot_region.x1 + inset, spec.lot_region.y1 + inset,
                          spec.lot_region.x2 - inset, spec.lot_region.y2 - inset};
  if (inner.x1 >= inner.x2 || inner.y1 >= inner.y2) {
    throw std::invalid_argument("mask inset erases the whole lot region");
  }
  const BoundingBox r = inner.clamped(spec.width, spec.height);
  for (int y = r.y1; y < r.y2; ++y) {
    for (int x = r.x1; x < r.x2; ++x) mask.set(x, y, 0, 0);
  }
  return mask;
}

SceneSpec standard_lot_spec() {
  SceneSpec spec;
  spec.width = 320;
  spec.height = 240;
  spec.lot_region = {20, 60, 300, 180};

  const int columns = 8;
  const int rows = 2;
  const int spot_w = (spec.lot_region.x2 - spec.lot_region.x1) / columns;  // 35
  const int spot_h = (spec.lot_region.y2 - spec.lot_region.y1) / rows;     // 60
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < columns; ++c) {
      const int x1 = spec.lot_region.x1 + c * spot_w;
      const int y1 = spec.lot_region.y1 + r * spot_h;
      spec.spots.push_back({x1 + 1, y1 + 1, x1 + spot_w - 1, y1 + spot_h - 1});
    }
  }
  return spec;
}

SceneSpec random_scene_spec(std::uint64_t seed, int min_occupied, int max_occupied,
                            int max_distractors) {
  SceneSpec spec = standard_lot_spec();
  std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);

  const int spot_count = static_cast<int>(spec.spots.size());
  if (max_occupied < 0 || max_occupied > spot_count) max_occupied = spot_count;
  min_occupied = std::clamp(min_occupied, 0, max_occupied);
  const int occupied_count =
      std::uniform_int_distribution<int>(min_occupied, max_occupied)(rng);

  std::vector<int> indices(spot_count);
  for (int i = 0; i < spot_count; ++i) indices[i] = i;
  std::shuffle(indices.begin(), indices.end(), rng);
  spec.occupied.assign(indices.begin(), indices.begin() + occupied_count);
  std::sort(spec.occupied.begin(), spec.occupied.end());

  // distractors on the strip above the lot, clear of the lot region
  const int count = std::uniform_int_distribution<int>(0, max_distractors)(rng);
  for (int i = 0; i < count; ++i) {
    const int w = std::uniform_int_distribution<int>(26, 40)(rng);
    const int h = std::uniform_int_distribution<int>(18, 26)(rng);
    const int max_y = spec.lot_region.y1 - h - 6;
    if (max_y <= 8) break;
    const int x = std::uniform_int_distribution<int>(4, spec.width - w - 4)(rng);
    const int y = std::uniform_int_distribution<int>(8, max_y)(rng);
    spec.distractors.push_back({x, y, x + w, y + h});
  }
  return spec;
}

double gray_fraction(const ImageBuffer& image, const BoundingBox& box) {
  const BoundingBox r = box.clamped(image.width(), image.height());
  const long long total = r.area();
  if (total <= 0) return 0.0;
  long long gray = 0;
  for (int y = r.y1; y < r.y2; ++y) {
    for (int x = r.x1; x < r.x2; ++x) {
      if (image.channels() == 1) {
        if (image.at(x, y, 0) == kPreMaskGray) ++gray;
      } else if (image.at(x, y, 0) == kPreMaskGray && image.at(x, y, 1) == kPreMaskGray &&
                 image.at(x, y, 2) == kPreMaskGray) {
        ++gray;
      }
    }
  }
  return static_cast<double>(gray) / static_cast<double>(total);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SyntheticBackend::SyntheticBackend(DetectorNoise noise, std::string model_id)
    : noise_(noise) {
  descriptor_.backend_id = "synthetic";
  descriptor_.model_id = std::move(model_id);
}

void SyntheticBackend::register_scene(const std::string& image_id, const SyntheticScene& scene) {
  ground_truth_[image_id] = scene.ground_truth;
}

std::vector<Detection> SyntheticBackend::detect(const ImageBuffer& image,
                                                const std::string& image_id) {
  const auto it = ground_truth_.find(image_id);
  if (it == ground_truth_.end()) return {};

  std::mt19937_64 rng(fnv1a64(image_id) ^ noise_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Detection> out;
  for (const Detection& truth : it->second) {
    const double masked = gray_fraction(image, truth.box);
    if (masked >= noise_.hide_threshold) continue;
    const double p_miss = noise_.drop_rate + noise_.crop_penalty * masked;
    if (p_miss > 0.0 && unit(rng) < p_miss) continue;
    out.push_back(truth);
  }

  if (noise_.spurious_rate > 0.0 && unit(rng) < noise_.spurious_rate) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      const int w = std::uniform_int_distribution<int>(18, 40)(rng);
      const int h = std::uniform_int_distribution<int>(24, 48)(rng);
      if (image.width() <= w || image.height() <= h) break;
      const int x = std::uniform_int_distribution<int>(0, image.width() - w - 1)(rng);
      const int y = std::uniform_int_distribution<int>(0, image.height() - h - 1)(rng);
      const BoundingBox box{x, y, x + w, y + h};
      if (gray_fraction(image, box) >= noise_.hide_threshold) continue;
      Detection ghost;
      ghost.class_label = "car";
      ghost.confidence = 0.30 + 0.30 * unit(rng);
      ghost.box = box;
      out.push_back(std::move(ghost));
      break;
    }
  }

  clamp_detections(out, image.width(), image.height());
  return out;
}

}  // namespace parkvision
