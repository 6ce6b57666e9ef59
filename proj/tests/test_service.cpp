#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "parkvision/image_io.hpp"
#include "parkvision/service.hpp"
#include "parkvision/synthetic.hpp"
#include "test_support.hpp"

using namespace parkvision;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path dir = fs::temp_directory_path() /
                       ("parkvision-" + tag + "-" + std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

struct SceneCorpus {
  fs::path dir;
  fs::path mask_path;
  std::vector<SyntheticScene> scenes;
  std::shared_ptr<SyntheticBackend> oracle;

  ~SceneCorpus() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

// Renders `count` random scenes into a directory and registers them
// with a fresh oracle backend, keyed by filename.
SceneCorpus make_scene_corpus(int count, std::uint64_t seed, int mask_inset = 6) {
  SceneCorpus corpus;
  corpus.dir = make_temp_dir("scenes");
  corpus.oracle = std::make_shared<SyntheticBackend>();

  for (int i = 0; i < count; ++i) {
    const SceneSpec spec = random_scene_spec(seed + i);
    SyntheticScene scene = render_scene(spec, seed + i);
    char name[32];
    std::snprintf(name, sizeof(name), "scene-%03d.png", i);
    save_image(scene.image, corpus.dir / name);
    corpus.oracle->register_scene(name, scene);
    corpus.scenes.push_back(std::move(scene));
  }

  corpus.mask_path = corpus.dir / "mask.png";
  save_image(lot_mask_image(standard_lot_spec(), mask_inset), corpus.mask_path);
  return corpus;
}

LotConfig base_config(const SceneCorpus& corpus) {
  LotConfig config;
  config.lot_id = "test-lot";
  config.capacity = 16;
  config.mask_path = corpus.mask_path.string();
  config.capture_interval_s = 0.01;
  config.roi_method = RoiMethod::post;
  config.source.kind = "directory";
  config.source.path = corpus.dir.string();
  config.history_path = (corpus.dir / "history.jsonl").string();
  return config;
}

class AlwaysDownBackend : public DetectorBackend {
public:
  AlwaysDownBackend() { descriptor_.backend_id = descriptor_.model_id = "down"; }
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer&, const std::string&) override {
    ++calls_;
    throw BackendError("backend down", true);
  }
  int calls() const { return calls_; }

private:
  BackendDescriptor descriptor_;
  int calls_ = 0;
};

class SlowOracle : public DetectorBackend {
public:
  explicit SlowOracle(double delay_s) : delay_s_(delay_s) {
    descriptor_.backend_id = descriptor_.model_id = "slow";
  }
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Detection> detect(const ImageBuffer&, const std::string&) override {
    call_times_.push_back(std::chrono::steady_clock::now());
    std::this_thread::sleep_for(std::chrono::duration<double>(delay_s_));
    return {};
  }
  const std::vector<std::chrono::steady_clock::time_point>& call_times() const {
    return call_times_;
  }

private:
  double delay_s_;
  BackendDescriptor descriptor_;
  std::vector<std::chrono::steady_clock::time_point> call_times_;
};

OccupancyRecord sample_record(int vehicles = 3) {
  OccupancyRecord rec;
  rec.lot_id = "test-lot";
  rec.timestamp = 1700000000 + vehicles;
  rec.capacity = 16;
  rec.vehicles = vehicles;
  rec.free = 16 - vehicles;
  rec.model_id = "m";
  return rec;
}

}  // namespace

TEST_CASE("lot config parsing, env overrides and validation") {
  const fs::path dir = make_temp_dir("config");
  const fs::path file = dir / "config.json";
  std::ofstream(file) << R"({
    "lot_id": "unicamp-16",
    "capacity": 16,
    "mask_path": "mask.png",
    "capture_interval_s": 300,
    "roi_method": "post",
    "allowed_classes": ["car", "truck"],
    "backend": {"kind": "remote", "endpoint": "http://example:9000", "timeout_s": 12},
    "publish": {"endpoint": "http://sink:8000", "queue_max": 64},
    "source": {"kind": "directory", "path": "frames"},
    "history_path": "history.jsonl"
  })";

  LotConfig config = load_lot_config(file);
  CHECK(config.lot_id == "unicamp-16");
  CHECK(config.capacity == 16);
  CHECK(config.roi_method == RoiMethod::post);
  CHECK(config.backend.kind == "remote");
  CHECK(config.backend.remote.endpoint == "http://example:9000");
  CHECK(config.backend.remote.timeout_s == 12.0);
  CHECK(config.publish.endpoint == "http://sink:8000");
  CHECK(config.publish.queue_max == 64);
  CHECK_NOTHROW(validate_lot_config(config));

  setenv("PARKVISION_PUBLISH_ENDPOINT", "http://override:1234", 1);
  setenv("PARKVISION_PUBLISH_TOKEN", "secret", 1);
  config = load_lot_config(file);
  CHECK(config.publish.endpoint == "http://override:1234");
  CHECK(config.publish.bearer_token == "secret");
  unsetenv("PARKVISION_PUBLISH_ENDPOINT");
  unsetenv("PARKVISION_PUBLISH_TOKEN");

  config.capacity = 0;
  CHECK_THROWS_AS(validate_lot_config(config), std::invalid_argument);
  config.capacity = 16;
  config.capture_interval_s = 0;
  CHECK_THROWS_AS(validate_lot_config(config), std::invalid_argument);
  config.capture_interval_s = 1;
  config.backend.kind = "martian";
  CHECK_THROWS_AS(validate_lot_config(config), std::invalid_argument);

  CHECK_THROWS_AS(roi_method_from_string("sideways"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("occupancy record json round trip") {
  const OccupancyRecord rec = sample_record(5);
  const OccupancyRecord back = record_from_json(record_to_json(rec));
  CHECK(back == rec);

  // payload is flat and small: nothing image-like can hide in it
  const std::string payload = record_to_json(rec).dump();
  CHECK(payload.size() < 1024);
  CHECK(payload.find("image") == std::string::npos);
}

TEST_CASE("history writer appends and reloads") {
  const fs::path dir = make_temp_dir("history");
  const fs::path file = dir / "history.jsonl";
  {
    HistoryWriter writer(file);
    writer.append(sample_record(1));
    writer.append(sample_record(2));
  }
  {
    HistoryWriter writer(file);  // append mode keeps old lines
    writer.append(sample_record(3));
  }
  const auto records = load_history(file);
  REQUIRE(records.size() == 3);
  CHECK(records[0].vehicles == 1);
  CHECK(records[2].vehicles == 3);
  fs::remove_all(dir);
}

TEST_CASE("directory image source replays files in name order") {
  SceneCorpus corpus = make_scene_corpus(3, 9000);
  DirectoryImageSource source(corpus.dir);
  CHECK(source.finite());
  CHECK(source.frame_count() == 4);  // 3 scenes + the mask image

  std::vector<std::string> ids;
  while (auto frame = source.next()) ids.push_back(frame->id);
  CHECK(ids == std::vector<std::string>{"mask.png", "scene-000.png", "scene-001.png",
                                        "scene-002.png"});
  CHECK_THROWS_AS(DirectoryImageSource(corpus.dir / "nope"), std::invalid_argument);
}

TEST_CASE("command image source runs the capture hook") {
  SceneCorpus corpus = make_scene_corpus(1, 9100);
  const fs::path staging = corpus.dir / "staging.png";
  CommandImageSource source("cp " + (corpus.dir / "scene-000.png").string() + " {out}",
                            staging);
  CHECK_FALSE(source.finite());
  const auto frame = source.next();
  REQUIRE(frame.has_value());
  CHECK(frame->id == "capture-1");
  CHECK(frame->image.width() == 320);

  CommandImageSource broken("false", staging);
  CHECK_THROWS_AS(broken.next(), std::runtime_error);
}

TEST_CASE("pipeline post mode counts ground truth through the oracle") {
  SceneCorpus corpus = make_scene_corpus(5, 41);
  LotConfig config = base_config(corpus);

  // feed only scene files, not the mask
  auto source = std::make_unique<DirectoryImageSource>(corpus.dir);
  RoiMask mask = load_mask(load_image(corpus.mask_path));

  Pipeline pipeline(config, corpus.oracle, std::move(source), mask, nullptr, nullptr);
  std::vector<int> produced;
  while (auto record = pipeline.run_once()) {
    if (record) produced.push_back(record->vehicles);
  }
  CHECK(pipeline.source_exhausted());

  // first frame is mask.png (unknown to the oracle -> 0 vehicles)
  REQUIRE(produced.size() == 6);
  CHECK(produced[0] == 0);
  for (int i = 0; i < 5; ++i) {
    CHECK(produced[i + 1] == corpus.scenes[i].roi_vehicle_count);
    CHECK(produced[i + 1] <= 16);
  }
  CHECK(pipeline.stats().cycles_completed == 6);
}

TEST_CASE("pipeline filters distractors in post mode") {
  SceneSpec spec = standard_lot_spec();
  spec.occupied = {0, 2, 4, 6, 9, 11, 13, 15};
  spec.distractors = {{10, 10, 42, 32},  {60, 8, 94, 30},   {120, 12, 150, 34},
                      {170, 10, 200, 32}, {240, 14, 272, 36}};
  const SyntheticScene scene = render_scene(spec, 77);
  REQUIRE(scene.ground_truth.size() == 13);

  const RoiMask mask = load_mask(lot_mask_image(spec, 6));
  auto oracle = std::make_shared<SyntheticBackend>();
  oracle->register_scene("s.png", scene);

  // brute-force check: every distractor center sits on a non-ROI pixel
  for (std::size_t i = 8; i < scene.ground_truth.size(); ++i) {
    const auto [cx, cy] = scene.ground_truth[i].box.center();
    CHECK_FALSE(point_in_roi(mask, cx, cy));
  }

  const auto dets = oracle->detect(scene.image, "s.png");
  const CountResult count = filter_detections(dets, mask);
  CHECK(count.total_detections == 13);
  CHECK(count.in_roi_count == 8);
}

TEST_CASE("pipeline pre mode masks the frame and counts everything the detector sees") {
  // interior spots only: pre-masking must not hide any of them
  SceneSpec spec = standard_lot_spec();
  spec.occupied = {1, 2, 3, 4, 5};  // top row interior columns
  spec.distractors = {{10, 10, 42, 32}, {60, 8, 94, 30}};
  const SyntheticScene scene = render_scene(spec, 13);

  const fs::path dir = make_temp_dir("pre");
  save_image(scene.image, dir / "s.png");
  const fs::path mask_path = dir / "mask.png";
  save_image(lot_mask_image(spec, 6), mask_path);

  auto oracle = std::make_shared<SyntheticBackend>();
  oracle->register_scene("s.png", scene);

  LotConfig config;
  config.capacity = 16;
  config.mask_path = mask_path.string();
  config.roi_method = RoiMethod::pre;

  RoiMask mask = load_mask(load_image(mask_path));
  Pipeline pipeline(config, oracle,
                    std::make_unique<DirectoryImageSource>(dir), mask, nullptr, nullptr);
  // skip the mask.png frame
  auto first = pipeline.run_once();
  REQUIRE(first.has_value());
  auto record = pipeline.run_once();
  REQUIRE(record.has_value());
  // distractors are fully gray under the pre-mask; the five top-row
  // cars overhang only the top edge and stay visible
  CHECK(record->vehicles == 5);
  CHECK(record->free == 11);
  fs::remove_all(dir);
}

TEST_CASE("backend failure: retry policy then skip, nothing published") {
  SceneCorpus corpus = make_scene_corpus(1, 4242);
  LotConfig config = base_config(corpus);
  config.backend.retries = 2;
  config.backend.retry_delay_s = 0.01;

  auto down = std::make_shared<AlwaysDownBackend>();
  RoiMask mask = load_mask(load_image(corpus.mask_path));
  Publisher publisher(PublishConfig{});  // no endpoint; queue only

  Pipeline pipeline(config, down, std::make_unique<DirectoryImageSource>(corpus.dir), mask,
                    nullptr, &publisher);
  const auto record = pipeline.run_once();
  CHECK_FALSE(record.has_value());
  CHECK(pipeline.stats().cycles_skipped_backend == 1);
  CHECK(pipeline.stats().backend_retries == 2);
  CHECK(down->calls() == 3);  // initial try + 2 retries
  CHECK(publisher.queue_depth() == 0);
  publisher.flush_and_stop();
}

TEST_CASE("publish: healthy sink acknowledges") {
  testsupport::OccupancySink sink;
  PublishConfig config;
  config.endpoint = sink.endpoint();
  const PublishAck ack = publish_record(sample_record(4), config);
  CHECK(ack.status == 200);
  CHECK(ack.latency_ms > 0.0);
  REQUIRE(sink.accepted() == 1);
  const auto body = nlohmann::json::parse(sink.bodies()[0]);
  CHECK(body["vehicles"] == 4);
  CHECK(body["lot_id"] == "test-lot");
}

TEST_CASE("publish: malformed acknowledgment throws") {
  testsupport::OccupancySink sink(testsupport::OccupancySink::Mode::garbage_ack);
  PublishConfig config;
  config.endpoint = sink.endpoint();
  CHECK_THROWS_WITH_AS(publish_record(sample_record(), config),
                       doctest::Contains("malformed"), PublishError);

  testsupport::OccupancySink refusing(testsupport::OccupancySink::Mode::refuse);
  config.endpoint = refusing.endpoint();
  CHECK_THROWS_AS(publish_record(sample_record(), config), PublishError);
}

TEST_CASE("publisher keeps unacknowledged records queued") {
  testsupport::OccupancySink sink(testsupport::OccupancySink::Mode::garbage_ack);
  PublishConfig config;
  config.endpoint = sink.endpoint();
  config.retry_delay_s = 0.05;

  Publisher publisher(config);
  publisher.enqueue(sample_record());
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(publisher.published_count() == 0);
  CHECK(publisher.queue_depth() == 1);  // the record stays queued

  publisher.flush_and_stop();
  CHECK(publisher.queue_depth() == 0);
  CHECK(publisher.unpublished_at_shutdown() == 1);
}

TEST_CASE("publisher bounded queue drops the oldest records") {
  PublishConfig config;
  config.endpoint = "http://127.0.0.1:1";  // down
  config.timeout_s = 0.2;
  config.retry_delay_s = 30.0;  // park the worker after the first failure
  config.queue_max = 3;

  Publisher publisher(config);
  for (int i = 0; i < 6; ++i) publisher.enqueue(sample_record(i));
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK(publisher.queue_depth() == 3);
  CHECK(publisher.dropped_count() == 3);
  publisher.flush_and_stop();
  CHECK(publisher.published_count() == 0);
}

TEST_CASE("publisher flush delivers the backlog before stopping") {
  testsupport::OccupancySink sink;
  PublishConfig config;
  config.endpoint = sink.endpoint();
  config.retry_delay_s = 0.05;

  Publisher publisher(config);
  for (int i = 0; i < 5; ++i) publisher.enqueue(sample_record(i));
  publisher.flush_and_stop();

  CHECK(publisher.published_count() == 5);
  CHECK(publisher.queue_depth() == 0);
  CHECK(publisher.unpublished_at_shutdown() == 0);
  CHECK(sink.accepted() == 5);
}

TEST_CASE("publisher recovers when the sink comes back") {
  testsupport::OccupancySink sink(testsupport::OccupancySink::Mode::down_then_ok);
  sink.set_failures(2);
  PublishConfig config;
  config.endpoint = sink.endpoint();
  config.retry_delay_s = 0.02;

  Publisher publisher(config);
  publisher.enqueue(sample_record(7));
  for (int i = 0; i < 100 && publisher.published_count() < 1; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(publisher.published_count() == 1);
  CHECK(publisher.queue_depth() == 0);
  REQUIRE(publisher.last_ack().has_value());
  CHECK(publisher.last_ack()->status == 200);
  publisher.flush_and_stop();
}

TEST_CASE("serve: one record per tick, increasing timestamps, queue flushed") {
  SceneCorpus corpus = make_scene_corpus(3, 31337);
  // keep the mask image out of the replay directory
  const fs::path frames = make_temp_dir("frames");
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene-%03d.png", i);
    fs::copy_file(corpus.dir / name, frames / name);
  }

  testsupport::OccupancySink sink;
  LotConfig config = base_config(corpus);
  config.source.path = frames.string();
  config.capture_interval_s = 1.1;  // seconds-resolution timestamps must differ
  config.publish.endpoint = sink.endpoint();
  config.publish.retry_delay_s = 0.05;
  config.history_path = (frames / "history.jsonl").string();

  Service service(config, ServiceParts{corpus.oracle, nullptr});
  service.run();  // finite source: returns after the replay

  const auto records = load_history(config.history_path);
  REQUIRE(records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(records[i].vehicles == corpus.scenes[i].roi_vehicle_count);
    CHECK(records[i].lot_id == "test-lot");
    if (i > 0) CHECK(records[i].timestamp > records[i - 1].timestamp);
  }

  // everything published, nothing oversized, queue drained
  CHECK(sink.accepted() == 3);
  CHECK(sink.oversized() == 0);
  CHECK(service.publisher()->queue_depth() == 0);

  // history replay reproduces the published numbers exactly
  const auto bodies = sink.bodies();
  REQUIRE(bodies.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(record_from_json(nlohmann::json::parse(bodies[i])) == records[i]);
  }
  fs::remove_all(frames);
}

TEST_CASE("serve never overlaps cycles; missed ticks collapse") {
  SceneCorpus corpus = make_scene_corpus(4, 555);
  const fs::path frames = make_temp_dir("overlap");
  for (int i = 0; i < 4; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene-%03d.png", i);
    fs::copy_file(corpus.dir / name, frames / name);
  }

  auto slow = std::make_shared<SlowOracle>(0.25);
  LotConfig config = base_config(corpus);
  config.source.path = frames.string();
  config.capture_interval_s = 0.1;  // far below the cycle duration
  config.history_path = (frames / "history.jsonl").string();

  Service service(config, ServiceParts{slow, nullptr});
  service.run();

  const auto& times = slow->call_times();
  REQUIRE(times.size() == 4);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double gap = std::chrono::duration<double>(times[i] - times[i - 1]).count();
    CHECK(gap >= 0.24);  // a new cycle never starts while one is running
    CHECK(gap < 0.6);    // and starts promptly once the previous ends
  }
  fs::remove_all(frames);
}

TEST_CASE("service request_stop interrupts the wait") {
  SceneCorpus corpus = make_scene_corpus(2, 777);
  const fs::path frames = make_temp_dir("stop");
  fs::copy_file(corpus.dir / "scene-000.png", frames / "scene-000.png");
  fs::copy_file(corpus.dir / "scene-001.png", frames / "scene-001.png");

  LotConfig config = base_config(corpus);
  config.source.path = frames.string();
  config.capture_interval_s = 60.0;  // would block for a minute without the stop
  config.history_path = (frames / "history.jsonl").string();

  Service service(config, ServiceParts{corpus.oracle, nullptr});
  std::thread runner([&] { service.run(); });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  service.request_stop();
  runner.join();

  CHECK(load_history(config.history_path).size() == 1);  // only the immediate first tick
  fs::remove_all(frames);
}
