#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkvision/backend.hpp"
#include "parkvision/types.hpp"

namespace parkvision {

/// Standard protocol constants: 1500 timed inferences on one fixed
/// image, the first 100 discarded as warmup.
inline constexpr int kStandardIterations = 1500;
inline constexpr int kStandardWarmupDiscard = 100;

struct BenchPlan {
  std::string backend_id;
  std::vector<std::string> image_ids;  // cycled; one id = single repeated image
  int total_iterations = kStandardIterations;
  int warmup_discard = kStandardWarmupDiscard;
  bool randomize = false;  // pick images uniformly at random instead of cycling
  std::uint64_t seed = 0;
  std::string hardware_tag = "local";
};

/// Throws std::invalid_argument when the plan breaks an invariant
/// (warmup_discard must be < total_iterations, images must exist).
void validate_plan(const BenchPlan& plan, const std::map<std::string, ImageBuffer>& images);

struct BenchSample {
  int iteration = 0;
  double duration_ms = 0.0;
  std::int64_t timestamp_ms = 0;  // wall clock, for spotting thermal drift
};

struct BenchRun {
  BenchPlan plan;
  std::string model_id;
  std::vector<BenchSample> samples;  // every iteration, warmup included
  std::optional<LatencyStats> stats; // absent when no post-warmup sample finished
  bool failed = false;
  std::string error;
};

/// Mean, sample standard deviation (n-1), min and max over the samples
/// after the first `warmup_discard`. Uses compensated summation so the
/// result is a pure function of the input sequence.
LatencyStats summarize_latencies(const std::vector<double>& durations_ms, int warmup_discard);

/// Times backend.detect() per call with the monotonic clock. Images are
/// pre-loaded by the caller; disk I/O never lands in a sample. Backend
/// failure mid-run keeps the partial samples and marks the run failed.
BenchRun run_bench(const BenchPlan& plan, DetectorBackend& backend,
                   const std::map<std::string, ImageBuffer>& images);

/// run_bench with the standard protocol constants on a single image.
BenchRun standard_latency_protocol(DetectorBackend& backend, const ImageBuffer& image);

std::string samples_csv(const std::vector<BenchSample>& samples);
void write_samples_csv(const std::vector<BenchSample>& samples, const std::filesystem::path& path);

struct BenchSummaryEntry {
  std::string hardware_tag;
  std::string backend_id;
  std::string model_id;
  LatencyStats stats;
  bool failed = false;
};

BenchSummaryEntry summary_entry(const BenchRun& run);
nlohmann::json summary_to_json(const std::vector<BenchSummaryEntry>& entries);
std::vector<BenchSummaryEntry> summary_from_json(const nlohmann::json& doc);
std::vector<BenchSummaryEntry> load_summary_file(const std::filesystem::path& path);

/// Inserts or replaces the entry keyed by (hardware_tag, backend_id,
/// model_id) and rewrites the file.
void merge_into_summary_file(const BenchSummaryEntry& entry, const std::filesystem::path& path);

/// External latency figures drawn as dashed lines for orientation;
/// they are never part of any assertion.
struct ReferenceLatency {
  std::string name;
  double mean_ms = 0.0;
};

struct CompareReport {
  std::string table_csv;
  std::string chart_svg;  // log-scale y axis
};

CompareReport compare_report(const std::vector<BenchSummaryEntry>& entries,
                             const std::vector<ReferenceLatency>& references = {});

}  // namespace parkvision
