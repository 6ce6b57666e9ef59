#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "parkvision/detections_io.hpp"
#include "parkvision/types.hpp"

using namespace parkvision;

TEST_CASE("image buffer validates its shape") {
  CHECK_THROWS_AS(ImageBuffer(0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(ImageBuffer(4, -1, 3), std::invalid_argument);
  CHECK_THROWS_AS(ImageBuffer(2, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(ImageBuffer(2, 2, 3, std::vector<std::uint8_t>(5)), std::invalid_argument);

  ImageBuffer img(2, 3, 3);
  CHECK(img.data().size() == 18);
  img.set_rgb(1, 2, 10, 20, 30);
  CHECK(img.at(1, 2, 0) == 10);
  CHECK(img.at(1, 2, 2) == 30);
}

TEST_CASE("bounding box center rounds ties toward zero") {
  CHECK(BoundingBox{0, 0, 10, 10}.center() == std::pair{5, 5});
  CHECK(BoundingBox{0, 0, 3, 3}.center() == std::pair{1, 1});  // 1.5 -> 1
  CHECK(BoundingBox{2, 4, 7, 9}.center() == std::pair{4, 6});
}

TEST_CASE("bounding box clamps into image bounds") {
  const BoundingBox box{-5, -2, 30, 12};
  const BoundingBox clamped = box.clamped(20, 10);
  CHECK(clamped == BoundingBox{0, 0, 20, 10});
  // already-clamped boxes are fixed points
  CHECK(clamped.clamped(20, 10) == clamped);
}

TEST_CASE("center of a clamped box stays in bounds") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(-50, 150);
  for (int i = 0; i < 500; ++i) {
    const auto box =
        BoundingBox::of(coord(rng), coord(rng), coord(rng), coord(rng)).clamped(100, 80);
    const auto [cx, cy] = box.center();
    CHECK(cx >= 0);
    CHECK(cx <= 100);
    CHECK(cy >= 0);
    CHECK(cy <= 80);
    // clamping the center again changes nothing
    CHECK(std::clamp(cx, 0, 100) == cx);
    CHECK(std::clamp(cy, 0, 80) == cy);
  }
}

TEST_CASE("round_half_down") {
  CHECK(round_half_down(3.5) == 3);
  CHECK(round_half_down(3.51) == 4);
  CHECK(round_half_down(3.49) == 3);
  CHECK(round_half_down(-0.5) == 0);
  CHECK(round_half_down(0.0) == 0);
}

TEST_CASE("detection validation") {
  Detection det{"car", 0.5, {0, 0, 4, 4}};
  CHECK_NOTHROW(validate_detection(det));
  det.confidence = 1.5;
  CHECK_THROWS_WITH_AS(validate_detection(det),
                       doctest::Contains("confidence out of range"), std::invalid_argument);
  det.confidence = 0.5;
  det.class_label.clear();
  CHECK_THROWS_AS(validate_detection(det), std::invalid_argument);
}

TEST_CASE("confusion counts arithmetic stays non-negative") {
  ConfusionCounts a{3, 4, 0, 1};
  ConfusionCounts b{1, 0, 2, 0};
  const ConfusionCounts sum = a + b;
  CHECK(sum == ConfusionCounts{4, 4, 2, 1});
  CHECK(sum.total() == 11);
  CHECK_NOTHROW(validate_confusion(sum));
  CHECK_THROWS_AS(validate_confusion(ConfusionCounts{-1, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("parse_detections: single well-formed record") {
  const auto set = parse_detections(
      R"({"img_ignored":1,"image":"a.jpg","class":"car","confidence":0.9,"box":[0,0,10,10]})");
  REQUIRE(set.image_count() == 1);
  const auto* dets = set.find("a.jpg");
  REQUIRE(dets != nullptr);
  REQUIRE(dets->size() == 1);
  CHECK((*dets)[0].class_label == "car");
  CHECK((*dets)[0].confidence == doctest::Approx(0.9));
  CHECK((*dets)[0].box == BoundingBox{0, 0, 10, 10});
}

TEST_CASE("parse_detections: empty file yields empty map") {
  CHECK(parse_detections("").empty());
  CHECK(parse_detections("\n\n").empty());
}

TEST_CASE("parse_detections: out-of-range confidence is rejected with the line number") {
  const char* text =
      "{\"image\":\"a.jpg\",\"class\":\"car\",\"confidence\":0.9,\"box\":[0,0,10,10]}\n"
      "{\"image\":\"a.jpg\",\"class\":\"car\",\"confidence\":1.5,\"box\":[0,0,10,10]}\n";
  CHECK_THROWS_WITH_AS(parse_detections(text), doctest::Contains("line 2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_detections(text), doctest::Contains("confidence out of range"),
                       std::runtime_error);
}

TEST_CASE("parse_detections: malformed line is rejected with the line number") {
  CHECK_THROWS_WITH_AS(parse_detections("{not json}\n"), doctest::Contains("line 1"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_detections("{\"image\":\"a\",\"class\":\"car\",\"confidence\":0.9,\"box\":[1,2]}\n"),
      doctest::Contains("box"), std::runtime_error);
}

TEST_CASE("parse_detections groups by image preserving file order") {
  const char* text =
      "{\"image\":\"b.jpg\",\"class\":\"car\",\"confidence\":0.5,\"box\":[0,0,2,2]}\n"
      "{\"image\":\"a.jpg\",\"class\":\"car\",\"confidence\":0.6,\"box\":[0,0,4,4]}\n"
      "{\"image\":\"b.jpg\",\"class\":\"truck\",\"confidence\":0.7,\"box\":[1,1,3,3]}\n";
  const auto set = parse_detections(text);
  REQUIRE(set.image_order() == std::vector<std::string>{"b.jpg", "a.jpg"});
  REQUIRE(set.find("b.jpg")->size() == 2);
  CHECK((*set.find("b.jpg"))[0].confidence == doctest::Approx(0.5));
  CHECK((*set.find("b.jpg"))[1].class_label == "truck");
}

TEST_CASE("serialize(parse(x)) is a fixed point of parse-serialize") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> n_images(1, 5);
  std::uniform_int_distribution<int> n_dets(0, 6);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::uniform_int_distribution<int> coord(0, 200);

  for (int round = 0; round < 50; ++round) {
    DetectionSet original;
    const int images = n_images(rng);
    for (int i = 0; i < images; ++i) {
      const std::string id = "img-" + std::to_string(i) + ".jpg";
      const int dets = n_dets(rng);
      for (int d = 0; d < dets; ++d) {
        Detection det;
        det.class_label = d % 2 == 0 ? "car" : "truck";
        det.confidence = conf(rng);
        det.box = BoundingBox::of(coord(rng), coord(rng), coord(rng), coord(rng));
        original.add(id, det);
      }
    }
    const std::string once = serialize_detections(original);
    const std::string twice = serialize_detections(parse_detections(once));
    CHECK(once == twice);
  }
}
