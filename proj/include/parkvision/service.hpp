#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "parkvision/backend.hpp"
#include "parkvision/remote.hpp"
#include "parkvision/roi.hpp"
#include "parkvision/types.hpp"

namespace parkvision {

enum class RoiMethod { pre, post };

std::string to_string(RoiMethod method);
RoiMethod roi_method_from_string(const std::string& s);

struct BackendChoice {
  std::string kind = "fixture";  // fixture | remote | sleep
  std::string detections_path;   // fixture
  RemoteConfig remote;           // remote
  std::vector<double> sleep_pattern_ms{10.0};
  int retries = 2;  // extra attempts on retryable failures, per cycle
  double retry_delay_s = 0.2;
};

struct PublishConfig {
  std::string endpoint;  // empty disables publishing (history only)
  std::string path = "/occupancy";
  std::string bearer_token;
  double timeout_s = 10.0;
  int queue_max = 256;
  double retry_delay_s = 0.5;
};

struct SourceConfig {
  std::string kind = "directory";  // directory | command
  std::string path;                // directory of frames
  bool loop = false;               // directory: start over when exhausted
  std::string command;             // capture command with an {out} placeholder
  std::string staging_path = "/tmp/parkvision-capture.jpg";
};

struct LotConfig {
  std::string lot_id = "lot";
  int capacity = 0;
  std::string mask_path;
  int mask_threshold = kDefaultMaskThreshold;
  double capture_interval_s = 300.0;  // five-minute default cadence
  RoiMethod roi_method = RoiMethod::post;
  std::set<std::string> allowed_classes = default_allowed_classes();
  BackendChoice backend;
  PublishConfig publish;
  SourceConfig source;
  std::string history_path = "history.jsonl";
};

LotConfig parse_lot_config(const nlohmann::json& doc);

/// Loads the config file and applies environment overrides
/// PARKVISION_PUBLISH_ENDPOINT and PARKVISION_PUBLISH_TOKEN.
LotConfig load_lot_config(const std::filesystem::path& path);

void validate_lot_config(const LotConfig& config);

/// Flat JSON payload; contains the record fields and nothing else, so
/// no image data can ride along.
nlohmann::json record_to_json(const OccupancyRecord& record);
OccupancyRecord record_from_json(const nlohmann::json& doc);

std::vector<OccupancyRecord> load_history(const std::filesystem::path& path);

/// Append-only JSONL history, one record per line, flushed per append.
class HistoryWriter {
public:
  explicit HistoryWriter(std::filesystem::path path);
  void append(const OccupancyRecord& record);
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

struct CapturedFrame {
  std::string id;
  ImageBuffer image;
};

/// Where frames come from. next() returns nullopt once a finite source
/// is exhausted; capture failures throw and the pipeline skips that
/// cycle.
class ImageSource {
public:
  virtual ~ImageSource() = default;
  virtual std::optional<CapturedFrame> next() = 0;
  virtual bool finite() const = 0;
};

/// Replays image files from a directory in filename order.
class DirectoryImageSource : public ImageSource {
public:
  explicit DirectoryImageSource(const std::filesystem::path& dir, bool loop = false);
  std::optional<CapturedFrame> next() override;
  bool finite() const override { return !loop_; }
  std::size_t frame_count() const { return files_.size(); }

private:
  std::vector<std::filesystem::path> files_;
  std::size_t index_ = 0;
  bool loop_;
};

/// Runs a capture command ({out} is replaced with the staging path)
/// and loads the produced file. This is the deployment hook for real
/// cameras.
class CommandImageSource : public ImageSource {
public:
  CommandImageSource(std::string command, std::filesystem::path staging_path);
  std::optional<CapturedFrame> next() override;
  bool finite() const override { return false; }

private:
  std::string command_;
  std::filesystem::path staging_path_;
  std::uint64_t counter_ = 0;
};

std::unique_ptr<ImageSource> make_image_source(const SourceConfig& config);
std::shared_ptr<DetectorBackend> make_backend(const BackendChoice& choice);

class PublishError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PublishAck {
  int status = 0;
  double latency_ms = 0.0;
};

/// Sends one record to the IoT endpoint. Success needs a 2xx status
/// and a body that is empty or a JSON object without "ok": false.
/// Anything else throws and the record should stay queued.
PublishAck publish_record(const OccupancyRecord& record, const PublishConfig& config);

/// Background at-least-once publisher with a bounded queue. When the
/// queue is full the oldest record is dropped. flush_and_stop() gives
/// every queued record one final delivery attempt before returning.
class Publisher {
public:
  explicit Publisher(PublishConfig config);
  ~Publisher();

  void enqueue(OccupancyRecord record);
  void flush_and_stop();

  std::size_t queue_depth() const;
  std::size_t published_count() const;
  std::size_t dropped_count() const;     // overwritten by the bounded queue
  std::size_t unpublished_at_shutdown() const;
  std::optional<PublishAck> last_ack() const;

private:
  void worker();

  PublishConfig config_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<OccupancyRecord> queue_;
  bool stopping_ = false;
  bool stopped_ = false;
  std::size_t published_ = 0;
  std::size_t dropped_ = 0;
  std::size_t unpublished_ = 0;
  std::optional<PublishAck> last_ack_;
  std::thread thread_;
};

struct PipelineStats {
  std::uint64_t cycles_completed = 0;
  std::uint64_t cycles_skipped_capture = 0;
  std::uint64_t cycles_skipped_backend = 0;
  std::uint64_t backend_retries = 0;
};

/// One capture -> detect -> count -> record cycle. Pre mode masks the
/// frame before detection and counts every allowed-class detection;
/// post mode detects on the untouched frame and keeps detections whose
/// box center lands on an ROI pixel. The record goes to history before
/// any publish attempt.
class Pipeline {
public:
  Pipeline(const LotConfig& config, std::shared_ptr<DetectorBackend> backend,
           std::unique_ptr<ImageSource> source, RoiMask mask, HistoryWriter* history,
           Publisher* publisher);

  /// nullopt when the cycle was skipped or the source is exhausted.
  std::optional<OccupancyRecord> run_once();

  bool source_exhausted() const { return exhausted_; }
  const PipelineStats& stats() const { return stats_; }

  /// Timestamp source, overridable in tests. Defaults to UTC seconds.
  void set_clock(std::function<std::int64_t()> now_fn) { now_fn_ = std::move(now_fn); }

private:
  std::vector<Detection> detect_with_retry(const ImageBuffer& image, const std::string& id);

  LotConfig config_;
  std::shared_ptr<DetectorBackend> backend_;
  std::unique_ptr<ImageSource> source_;
  RoiMask mask_;
  HistoryWriter* history_;
  Publisher* publisher_;
  PipelineStats stats_;
  bool exhausted_ = false;
  std::function<std::int64_t()> now_fn_;
};

/// Pieces a test can inject instead of building them from the config.
struct ServiceParts {
  std::shared_ptr<DetectorBackend> backend;
  std::unique_ptr<ImageSource> source;
};

/// The long-running deployment of the system: runs one pipeline cycle
/// per interval, never overlapping (a missed tick collapses into one
/// immediate cycle), and flushes the publish queue on shutdown. A
/// finite source ends the run when exhausted.
class Service {
public:
  explicit Service(const LotConfig& config, ServiceParts parts = {});

  void run();
  void request_stop();

  const PipelineStats& stats() const { return pipeline_->stats(); }
  const Publisher* publisher() const { return publisher_.get(); }

private:
  LotConfig config_;
  std::unique_ptr<HistoryWriter> history_;
  std::unique_ptr<Publisher> publisher_;
  std::unique_ptr<Pipeline> pipeline_;
  std::atomic<bool> stop_{false};
  std::mutex wait_mutex_;
  std::condition_variable wait_cv_;
};

}  // namespace parkvision
