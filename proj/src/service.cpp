#include "parkvision/service.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include <httplib.h>

#include "parkvision/detections_io.hpp"
#include "parkvision/image_io.hpp"
#include "parkvision/metrics.hpp"

namespace parkvision {

using nlohmann::json;

std::string to_string(RoiMethod method) {
  return method == RoiMethod::pre ? "pre" : "post";
}

RoiMethod roi_method_from_string(const std::string& s) {
  if (s == "pre") return RoiMethod::pre;
  if (s == "post") return RoiMethod::post;
  throw std::invalid_argument("roi_method must be 'pre' or 'post', got '" + s + "'");
}

LotConfig parse_lot_config(const json& doc) {
  LotConfig config;
  config.lot_id = doc.value("lot_id", config.lot_id);
  config.capacity = doc.value("capacity", 0);
  config.mask_path = doc.value("mask_path", std::string());
  config.mask_threshold = doc.value("mask_threshold", kDefaultMaskThreshold);
  config.capture_interval_s = doc.value("capture_interval_s", config.capture_interval_s);
  config.roi_method = roi_method_from_string(doc.value("roi_method", std::string("post")));
  config.history_path = doc.value("history_path", config.history_path);

  if (doc.contains("allowed_classes")) {
    config.allowed_classes.clear();
    for (const auto& c : doc["allowed_classes"]) {
      config.allowed_classes.insert(c.get<std::string>());
    }
  }

  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    config.backend.kind = b.value("kind", config.backend.kind);
    config.backend.detections_path = b.value("detections_path", std::string());
    config.backend.retries = b.value("retries", config.backend.retries);
    config.backend.retry_delay_s = b.value("retry_delay_s", config.backend.retry_delay_s);
    config.backend.remote.endpoint = b.value("endpoint", std::string());
    config.backend.remote.path = b.value("path", config.backend.remote.path);
    config.backend.remote.timeout_s = b.value("timeout_s", config.backend.remote.timeout_s);
    config.backend.remote.bearer_token = b.value("bearer_token", std::string());
    config.backend.remote.model_id = b.value("model_id", config.backend.remote.model_id);
    if (b.contains("pattern_ms")) {
      config.backend.sleep_pattern_ms.clear();
      for (const auto& v : b["pattern_ms"]) {
        config.backend.sleep_pattern_ms.push_back(v.get<double>());
      }
    }
  }

  if (doc.contains("publish")) {
    const auto& p = doc["publish"];
    config.publish.endpoint = p.value("endpoint", std::string());
    config.publish.path = p.value("path", config.publish.path);
    config.publish.bearer_token = p.value("bearer_token", std::string());
    config.publish.timeout_s = p.value("timeout_s", config.publish.timeout_s);
    config.publish.queue_max = p.value("queue_max", config.publish.queue_max);
    config.publish.retry_delay_s = p.value("retry_delay_s", config.publish.retry_delay_s);
  }

  if (doc.contains("source")) {
    const auto& s = doc["source"];
    config.source.kind = s.value("kind", config.source.kind);
    config.source.path = s.value("path", std::string());
    config.source.loop = s.value("loop", false);
    config.source.command = s.value("command", std::string());
    config.source.staging_path = s.value("staging_path", config.source.staging_path);
  }

  return config;
}

LotConfig load_lot_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid config JSON in " + path.string() + ": " + e.what());
  }
  LotConfig config = parse_lot_config(doc);

  if (const char* endpoint = std::getenv("PARKVISION_PUBLISH_ENDPOINT")) {
    config.publish.endpoint = endpoint;
  }
  if (const char* token = std::getenv("PARKVISION_PUBLISH_TOKEN")) {
    config.publish.bearer_token = token;
  }
  return config;
}

void validate_lot_config(const LotConfig& config) {
  if (config.capacity <= 0) throw std::invalid_argument("config: capacity must be positive");
  if (config.capture_interval_s <= 0.0) {
    throw std::invalid_argument("config: capture_interval_s must be positive");
  }
  if (config.mask_path.empty()) throw std::invalid_argument("config: mask_path is required");
  if (config.allowed_classes.empty()) {
    throw std::invalid_argument("config: allowed_classes must not be empty");
  }
  if (config.backend.kind != "fixture" && config.backend.kind != "remote" &&
      config.backend.kind != "sleep") {
    throw std::invalid_argument("config: unknown backend kind '" + config.backend.kind + "'");
  }
  if (config.source.kind != "directory" && config.source.kind != "command") {
    throw std::invalid_argument("config: unknown source kind '" + config.source.kind + "'");
  }
}

json record_to_json(const OccupancyRecord& record) {
  return {{"lot_id", record.lot_id},   {"timestamp", record.timestamp},
          {"capacity", record.capacity}, {"vehicles", record.vehicles},
          {"free", record.free},         {"model_id", record.model_id}};
}

OccupancyRecord record_from_json(const json& doc) {
  OccupancyRecord record;
  record.lot_id = doc.at("lot_id").get<std::string>();
  record.timestamp = doc.at("timestamp").get<std::int64_t>();
  record.capacity = doc.at("capacity").get<int>();
  record.vehicles = doc.at("vehicles").get<int>();
  record.free = doc.at("free").get<int>();
  record.model_id = doc.value("model_id", std::string());
  return record;
}

std::vector<OccupancyRecord> load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open history file: " + path.string());
  std::vector<OccupancyRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("history line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

HistoryWriter::HistoryWriter(std::filesystem::path path) : path_(std::move(path)) {
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw std::runtime_error("cannot open history file for append: " + path_.string());
}

void HistoryWriter::append(const OccupancyRecord& record) {
  std::lock_guard lock(mutex_);
  out_ << record_to_json(record).dump() << "\n";
  out_.flush();
  if (!out_) throw std::runtime_error("history write failed: " + path_.string());
}

DirectoryImageSource::DirectoryImageSource(const std::filesystem::path& dir, bool loop)
    : loop_(loop) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());
  if (files_.empty()) {
    throw std::invalid_argument("no image files in directory: " + dir.string());
  }
}

std::optional<CapturedFrame> DirectoryImageSource::next() {
  if (index_ >= files_.size()) {
    if (!loop_) return std::nullopt;
    index_ = 0;
  }
  const std::filesystem::path& file = files_[index_++];
  return CapturedFrame{file.filename().string(), load_image(file)};
}

CommandImageSource::CommandImageSource(std::string command, std::filesystem::path staging_path)
    : command_(std::move(command)), staging_path_(std::move(staging_path)) {
  if (command_.empty()) throw std::invalid_argument("capture command must not be empty");
}

std::optional<CapturedFrame> CommandImageSource::next() {
  std::string cmd = command_;
  const std::string placeholder = "{out}";
  if (const auto pos = cmd.find(placeholder); pos != std::string::npos) {
    cmd.replace(pos, placeholder.size(), staging_path_.string());
  }
  const int rc = std::system(cmd.c_str());
  if (rc != 0) {
    throw std::runtime_error("capture command failed with exit code " + std::to_string(rc));
  }
  ++counter_;
  return CapturedFrame{"capture-" + std::to_string(counter_), load_image(staging_path_)};
}

std::unique_ptr<ImageSource> make_image_source(const SourceConfig& config) {
  if (config.kind == "directory") {
    return std::make_unique<DirectoryImageSource>(config.path, config.loop);
  }
  if (config.kind == "command") {
    return std::make_unique<CommandImageSource>(config.command, config.staging_path);
  }
  throw std::invalid_argument("unknown source kind: " + config.kind);
}

std::shared_ptr<DetectorBackend> make_backend(const BackendChoice& choice) {
  if (choice.kind == "fixture") {
    if (choice.detections_path.empty()) {
      throw std::invalid_argument("fixture backend needs detections_path");
    }
    return std::make_shared<FixtureBackend>(load_detections_file(choice.detections_path));
  }
  if (choice.kind == "remote") {
    return std::make_shared<RemoteBackend>(choice.remote);
  }
  if (choice.kind == "sleep") {
    return std::make_shared<SleepBackend>(choice.sleep_pattern_ms);
  }
  throw std::invalid_argument("unknown backend kind: " + choice.kind);
}

PublishAck publish_record(const OccupancyRecord& record, const PublishConfig& config) {
  if (config.endpoint.empty()) throw PublishError("no publish endpoint configured");

  httplib::Client client(config.endpoint);
  const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double>(config.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!config.bearer_token.empty()) client.set_bearer_token_auth(config.bearer_token);

  const std::string body = record_to_json(record).dump();

  const auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post(config.path, body, "application/json");
  const auto t1 = std::chrono::steady_clock::now();

  if (!res) {
    throw PublishError("publish endpoint unreachable (" + config.endpoint +
                       "): " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw PublishError("publish rejected with status " + std::to_string(res->status));
  }
  if (!res->body.empty()) {
    json ack;
    try {
      ack = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw PublishError("malformed acknowledgment: " + res->body.substr(0, 120));
    }
    if (ack.is_object() && ack.contains("ok") && ack["ok"].is_boolean() && !ack["ok"].get<bool>()) {
      throw PublishError("sink refused the record");
    }
  }

  return PublishAck{res->status, std::chrono::duration<double, std::milli>(t1 - t0).count()};
}

Publisher::Publisher(PublishConfig config) : config_(std::move(config)) {
  thread_ = std::thread([this] { worker(); });
}

Publisher::~Publisher() {
  flush_and_stop();
}

void Publisher::enqueue(OccupancyRecord record) {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    while (queue_.size() >= static_cast<std::size_t>(std::max(1, config_.queue_max))) {
      queue_.pop_front();  // oldest-drop policy
      ++dropped_;
    }
    queue_.push_back(std::move(record));
  }
  cv_.notify_all();
}

void Publisher::flush_and_stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopped_) return;
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::lock_guard lock(mutex_);
  stopped_ = true;
}

std::size_t Publisher::queue_depth() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

std::size_t Publisher::published_count() const {
  std::lock_guard lock(mutex_);
  return published_;
}

std::size_t Publisher::dropped_count() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::size_t Publisher::unpublished_at_shutdown() const {
  std::lock_guard lock(mutex_);
  return unpublished_;
}

std::optional<PublishAck> Publisher::last_ack() const {
  std::lock_guard lock(mutex_);
  return last_ack_;
}

void Publisher::worker() {
  std::unique_lock lock(mutex_);
  for (;;) {
    cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });

    if (stopping_) {
      // final pass: one delivery attempt per remaining record
      while (!queue_.empty()) {
        OccupancyRecord record = queue_.front();
        queue_.pop_front();
        lock.unlock();
        try {
          PublishAck ack = publish_record(record, config_);
          lock.lock();
          ++published_;
          last_ack_ = ack;
        } catch (const std::exception& e) {
          std::cerr << "publish failed during shutdown flush: " << e.what() << "\n";
          lock.lock();
          ++unpublished_;
        }
      }
      return;
    }

    OccupancyRecord record = queue_.front();
    lock.unlock();
    bool ok = false;
    PublishAck ack;
    try {
      ack = publish_record(record, config_);
      ok = true;
    } catch (const std::exception& e) {
      std::cerr << "publish failed (will retry): " << e.what() << "\n";
    }
    lock.lock();
    if (ok) {
      // the front may have been dropped by the bounded queue meanwhile
      if (!queue_.empty() && queue_.front() == record) queue_.pop_front();
      ++published_;
      last_ack_ = ack;
    } else if (!stopping_) {
      const auto delay = std::chrono::duration<double>(config_.retry_delay_s);
      cv_.wait_for(lock, delay, [this] { return stopping_; });
    }
  }
}

Pipeline::Pipeline(const LotConfig& config, std::shared_ptr<DetectorBackend> backend,
                   std::unique_ptr<ImageSource> source, RoiMask mask, HistoryWriter* history,
                   Publisher* publisher)
    : config_(config),
      backend_(std::move(backend)),
      source_(std::move(source)),
      mask_(std::move(mask)),
      history_(history),
      publisher_(publisher) {
  if (!backend_) throw std::invalid_argument("pipeline needs a backend");
  if (!source_) throw std::invalid_argument("pipeline needs an image source");
  now_fn_ = [] {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

std::vector<Detection> Pipeline::detect_with_retry(const ImageBuffer& image,
                                                   const std::string& id) {
  int attempt = 0;
  for (;;) {
    try {
      return backend_->detect(image, id);
    } catch (const BackendError& e) {
      if (e.retryable() && attempt < config_.backend.retries) {
        ++attempt;
        ++stats_.backend_retries;
        std::this_thread::sleep_for(std::chrono::duration<double>(config_.backend.retry_delay_s));
        continue;
      }
      throw;
    }
  }
}

std::optional<OccupancyRecord> Pipeline::run_once() {
  std::optional<CapturedFrame> frame;
  try {
    frame = source_->next();
  } catch (const std::exception& e) {
    std::cerr << "capture failed, skipping cycle: " << e.what() << "\n";
    ++stats_.cycles_skipped_capture;
    return std::nullopt;
  }
  if (!frame) {
    exhausted_ = true;
    return std::nullopt;
  }

  CountResult count;
  try {
    if (config_.roi_method == RoiMethod::pre) {
      const ImageBuffer masked = apply_pre_mask(frame->image, mask_);
      const std::vector<Detection> dets = detect_with_retry(masked, frame->id);
      count = count_all_detections(dets, config_.allowed_classes);
    } else {
      const std::vector<Detection> dets = detect_with_retry(frame->image, frame->id);
      std::optional<SourceSize> space;
      if (frame->image.width() != mask_.width() || frame->image.height() != mask_.height()) {
        space = SourceSize{frame->image.width(), frame->image.height()};
      }
      count = filter_detections(dets, mask_, config_.allowed_classes, space);
    }
  } catch (const std::exception& e) {
    std::cerr << "backend failed, skipping cycle: " << e.what() << "\n";
    ++stats_.cycles_skipped_backend;
    return std::nullopt;
  }

  const OccupancyRecord record =
      make_occupancy_record(count, config_.capacity, config_.lot_id, now_fn_(),
                            backend_->descriptor().model_id);

  if (history_ != nullptr) history_->append(record);
  if (publisher_ != nullptr) publisher_->enqueue(record);

  ++stats_.cycles_completed;
  return record;
}

Service::Service(const LotConfig& config, ServiceParts parts) : config_(config) {
  validate_lot_config(config_);

  RoiMask mask = load_mask(load_image(config_.mask_path), config_.mask_threshold);

  history_ = std::make_unique<HistoryWriter>(config_.history_path);
  if (!config_.publish.endpoint.empty()) {
    publisher_ = std::make_unique<Publisher>(config_.publish);
  }

  std::shared_ptr<DetectorBackend> backend =
      parts.backend ? std::move(parts.backend) : make_backend(config_.backend);
  std::unique_ptr<ImageSource> source =
      parts.source ? std::move(parts.source) : make_image_source(config_.source);

  if (backend->descriptor().expects_pre_masked && config_.roi_method != RoiMethod::pre) {
    std::cerr << "warning: backend expects pre-masked frames but roi_method is post\n";
  }

  pipeline_ = std::make_unique<Pipeline>(config_, std::move(backend), std::move(source),
                                         std::move(mask), history_.get(), publisher_.get());
}

void Service::run() {
  using clock = std::chrono::steady_clock;
  const auto interval = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(config_.capture_interval_s));

  auto deadline = clock::now();
  while (!stop_.load()) {
    pipeline_->run_once();
    if (pipeline_->source_exhausted()) break;

    // fixed-cadence schedule; a cycle that overruns collapses the
    // missed ticks into one immediate cycle
    deadline += interval;
    const auto now = clock::now();
    if (deadline < now) deadline = now;

    std::unique_lock lock(wait_mutex_);
    wait_cv_.wait_until(lock, deadline, [this] { return stop_.load(); });
  }

  if (publisher_) publisher_->flush_and_stop();
}

void Service::request_stop() {
  stop_.store(true);
  wait_cv_.notify_all();
}

}  // namespace parkvision
