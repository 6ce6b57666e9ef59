#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "parkvision/backend.hpp"
#include "parkvision/types.hpp"

namespace parkvision {

/// Geometry of a rendered parking scene: a rectangular lot containing
/// pairwise-disjoint spot rectangles, plus distractor vehicles parked
/// entirely outside the lot region.
struct SceneSpec {
  int width = 320;
  int height = 240;
  BoundingBox lot_region;
  std::vector<BoundingBox> spots;
  std::vector<int> occupied;  // indices into spots, unique
  std::vector<BoundingBox> distractors;
};

/// Throws std::invalid_argument on overlapping spots, distractors that
/// touch the lot region, or out-of-range occupancy indices.
void validate_scene_spec(const SceneSpec& spec);

struct SyntheticScene {
  ImageBuffer image;  // RGB
  /// Every rendered vehicle (occupied spots and distractors), with the
  /// exact rendered rectangle as its box.
  std::vector<Detection> ground_truth;
  /// Vehicles inside the lot, i.e. the number of occupied spots.
  int roi_vehicle_count = 0;
};

/// Deterministic for a given (spec, seed): same seed, bit-identical
/// image. Vehicles in spots that touch the lot boundary overhang it a
/// little, the way real cars overhang painted lines.
SyntheticScene render_scene(const SceneSpec& spec, std::uint64_t seed);

/// Grayscale mask image for the scene: black inside the lot region
/// eroded by `inset` pixels, white elsewhere. Feed to load_mask().
ImageBuffer lot_mask_image(const SceneSpec& spec, int inset = 0);

/// The 16-spot reference lot (8 columns x 2 rows, 320x240).
SceneSpec standard_lot_spec();

/// Standard lot with seeded occupancy and distractors.
/// max_occupied < 0 means "up to every spot".
SceneSpec random_scene_spec(std::uint64_t seed, int min_occupied = 1, int max_occupied = -1,
                            int max_distractors = 4);

/// Detector error model for the synthetic backend. All rates in [0,1].
struct DetectorNoise {
  double drop_rate = 0.0;      // chance a visible vehicle is missed
  double spurious_rate = 0.0;  // chance of one extra false detection per image
  /// Extra miss probability per unit of masked-out box area; models a
  /// detector losing confidence when the gray pre-mask crops context.
  double crop_penalty = 0.0;
  /// Box gray fraction at which a vehicle is never detected at all.
  double hide_threshold = 0.5;
  std::uint64_t seed = 0;
};

/// Replays registered scene ground truth, optionally degraded by a
/// noise model. With the default (all-zero) noise it is a perfect
/// oracle. The backend inspects the image it is given: vehicles whose
/// boxes are covered by the pre-mask gray fill are missed, so it reacts
/// to pre- vs post-processing the way a real detector does. Noise is
/// seeded per image id, independent of call order.
class SyntheticBackend : public DetectorBackend {
public:
  explicit SyntheticBackend(DetectorNoise noise = {}, std::string model_id = "synthetic-oracle");

  void register_scene(const std::string& image_id, const SyntheticScene& scene);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer& image, const std::string& image_id) override;

private:
  std::unordered_map<std::string, std::vector<Detection>> ground_truth_;
  DetectorNoise noise_;
  BackendDescriptor descriptor_;
};

/// Fraction of box pixels equal to the pre-mask gray fill.
double gray_fraction(const ImageBuffer& image, const BoundingBox& box);

/// Stable 64-bit string hash (FNV-1a), used to derive per-image seeds.
std::uint64_t fnv1a64(const std::string& s);

}  // namespace parkvision
