#pragma once

// Local HTTP servers the backend/service tests talk to.

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "parkvision/detections_io.hpp"

namespace testsupport {

// Serves the remote-inference wire contract from a DetectionSet,
// looking records up by the X-Image-Id request header. `mode` switches
// the failure behavior under test.
class InferenceServer {
public:
  enum class Mode { ok, malformed_body, server_error, out_of_bounds_boxes };

  explicit InferenceServer(parkvision::DetectionSet fixtures, Mode mode = Mode::ok)
      : fixtures_(std::move(fixtures)), mode_(mode) {
    server_.Post("/detect", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (mode_ == Mode::server_error) {
        res.status = 500;
        return;
      }
      if (mode_ == Mode::malformed_body) {
        res.set_content("{this is not json", "application/json");
        return;
      }
      nlohmann::json detections = nlohmann::json::array();
      const std::string image_id = req.get_header_value("X-Image-Id");
      if (const auto* dets = fixtures_.find(image_id)) {
        for (const auto& det : *dets) {
          auto box = nlohmann::json::array(
              {det.box.x1, det.box.y1, det.box.x2, det.box.y2});
          if (mode_ == Mode::out_of_bounds_boxes) {
            box = nlohmann::json::array(
                {det.box.x1 - 5000, det.box.y1 - 5000, det.box.x2 + 5000, det.box.y2 + 5000});
          }
          detections.push_back(
              {{"class", det.class_label}, {"confidence", det.confidence}, {"box", box}});
        }
      }
      const nlohmann::json body{
          {"model_id", "fixture-server"}, {"inference_ms", 1.25}, {"detections", detections}};
      res.set_content(body.dump(), "application/json");
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("failed to bind inference server");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~InferenceServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

private:
  parkvision::DetectionSet fixtures_;
  Mode mode_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

// Occupancy sink. Rejects payloads above max_payload_bytes with 413 —
// an image smuggled into the publish path would trip this immediately.
class OccupancySink {
public:
  enum class Mode { ok, garbage_ack, refuse, down_then_ok };

  explicit OccupancySink(Mode mode = Mode::ok, std::size_t max_payload_bytes = 1024)
      : mode_(mode), max_payload_(max_payload_bytes) {
    server_.Post("/occupancy", [this](const httplib::Request& req, httplib::Response& res) {
      if (req.body.size() > max_payload_) {
        ++oversized_;
        res.status = 413;
        return;
      }
      if (mode_ == Mode::garbage_ack) {
        res.set_content("{ack?", "application/json");
        return;
      }
      if (mode_ == Mode::refuse) {
        res.set_content(R"({"ok":false})", "application/json");
        return;
      }
      if (mode_ == Mode::down_then_ok && failures_left_ > 0) {
        --failures_left_;
        res.status = 503;
        return;
      }
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(req.body);
      }
      res.set_content(R"({"ok":true})", "application/json");
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("failed to bind sink server");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~OccupancySink() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<std::string> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::size_t accepted() const {
    std::lock_guard lock(mutex_);
    return bodies_.size();
  }
  int oversized() const { return oversized_.load(); }
  void set_failures(int n) { failures_left_ = n; }

private:
  Mode mode_;
  std::size_t max_payload_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::atomic<int> oversized_{0};
  std::atomic<int> failures_left_{0};
};

}  // namespace testsupport
