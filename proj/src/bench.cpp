#include "parkvision/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "parkvision/svg.hpp"

namespace parkvision {

namespace {

double kahan_sum(const std::vector<double>& xs, std::size_t begin) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = begin; i < xs.size(); ++i) {
    const double y = xs[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void validate_plan(const BenchPlan& plan, const std::map<std::string, ImageBuffer>& images) {
  if (plan.total_iterations <= 0) {
    throw std::invalid_argument("total_iterations must be positive");
  }
  if (plan.warmup_discard < 0 || plan.warmup_discard >= plan.total_iterations) {
    throw std::invalid_argument("warmup_discard (" + std::to_string(plan.warmup_discard) +
                                ") must be smaller than total_iterations (" +
                                std::to_string(plan.total_iterations) + ")");
  }
  if (plan.image_ids.empty()) throw std::invalid_argument("plan needs at least one image id");
  for (const auto& id : plan.image_ids) {
    if (!images.contains(id)) throw std::invalid_argument("image not loaded: " + id);
  }
}

LatencyStats summarize_latencies(const std::vector<double>& durations_ms, int warmup_discard) {
  if (warmup_discard < 0 || static_cast<std::size_t>(warmup_discard) >= durations_ms.size()) {
    throw std::invalid_argument("warmup_discard must leave at least one sample");
  }
  const std::size_t begin = static_cast<std::size_t>(warmup_discard);
  const std::size_t n = durations_ms.size() - begin;

  LatencyStats stats;
  stats.samples_used = static_cast<int>(n);
  stats.discarded_warmup = warmup_discard;
  stats.mean_ms = kahan_sum(durations_ms, begin) / static_cast<double>(n);

  double min = durations_ms[begin];
  double max = durations_ms[begin];
  std::vector<double> sq;
  sq.reserve(n);
  for (std::size_t i = begin; i < durations_ms.size(); ++i) {
    const double d = durations_ms[i] - stats.mean_ms;
    sq.push_back(d * d);
    min = std::min(min, durations_ms[i]);
    max = std::max(max, durations_ms[i]);
  }
  stats.std_ms = n > 1 ? std::sqrt(kahan_sum(sq, 0) / static_cast<double>(n - 1)) : 0.0;
  stats.min_ms = min;
  stats.max_ms = max;
  return stats;
}

BenchRun run_bench(const BenchPlan& plan, DetectorBackend& backend,
                   const std::map<std::string, ImageBuffer>& images) {
  validate_plan(plan, images);

  BenchRun run;
  run.plan = plan;
  run.model_id = backend.descriptor().model_id;
  run.samples.reserve(static_cast<std::size_t>(plan.total_iterations));

  std::mt19937_64 rng(plan.seed);
  std::uniform_int_distribution<std::size_t> pick(0, plan.image_ids.size() - 1);

  using clock = std::chrono::steady_clock;
  for (int i = 0; i < plan.total_iterations; ++i) {
    const std::size_t idx = plan.randomize ? pick(rng) : i % plan.image_ids.size();
    const std::string& image_id = plan.image_ids[idx];
    const ImageBuffer& image = images.at(image_id);

    const auto t0 = clock::now();
    try {
      backend.detect(image, image_id);
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = "iteration " + std::to_string(i) + ": " + e.what();
      break;
    }
    const auto t1 = clock::now();
    run.samples.push_back(
        {i, std::chrono::duration<double, std::milli>(t1 - t0).count(), wall_clock_ms()});
  }

  if (run.samples.size() > static_cast<std::size_t>(plan.warmup_discard)) {
    std::vector<double> durations;
    durations.reserve(run.samples.size());
    for (const auto& s : run.samples) durations.push_back(s.duration_ms);
    run.stats = summarize_latencies(durations, plan.warmup_discard);
  }
  return run;
}

BenchRun standard_latency_protocol(DetectorBackend& backend, const ImageBuffer& image) {
  BenchPlan plan;
  plan.backend_id = backend.descriptor().backend_id;
  plan.image_ids = {"standard"};
  plan.total_iterations = kStandardIterations;
  plan.warmup_discard = kStandardWarmupDiscard;
  return run_bench(plan, backend, {{"standard", image}});
}

std::string samples_csv(const std::vector<BenchSample>& samples) {
  std::string out = "iteration,duration_ms,timestamp_ms\n";
  char buf[96];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%lld\n", s.iteration, s.duration_ms,
                  static_cast<long long>(s.timestamp_ms));
    out += buf;
  }
  return out;
}

void write_samples_csv(const std::vector<BenchSample>& samples,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write samples file: " + path.string());
  out << samples_csv(samples);
}

BenchSummaryEntry summary_entry(const BenchRun& run) {
  BenchSummaryEntry entry;
  entry.hardware_tag = run.plan.hardware_tag;
  entry.backend_id = run.plan.backend_id;
  entry.model_id = run.model_id;
  entry.failed = run.failed;
  if (run.stats) entry.stats = *run.stats;
  return entry;
}

namespace {

nlohmann::json stats_to_json(const LatencyStats& s) {
  return {{"samples_used", s.samples_used}, {"discarded_warmup", s.discarded_warmup},
          {"mean_ms", s.mean_ms},           {"std_ms", s.std_ms},
          {"min_ms", s.min_ms},             {"max_ms", s.max_ms}};
}

LatencyStats stats_from_json(const nlohmann::json& doc) {
  LatencyStats s;
  s.samples_used = doc.value("samples_used", 0);
  s.discarded_warmup = doc.value("discarded_warmup", 0);
  s.mean_ms = doc.value("mean_ms", 0.0);
  s.std_ms = doc.value("std_ms", 0.0);
  s.min_ms = doc.value("min_ms", 0.0);
  s.max_ms = doc.value("max_ms", 0.0);
  return s;
}

}  // namespace

nlohmann::json summary_to_json(const std::vector<BenchSummaryEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"hardware", e.hardware_tag},
                   {"backend_id", e.backend_id},
                   {"model_id", e.model_id},
                   {"failed", e.failed},
                   {"stats", stats_to_json(e.stats)}});
  }
  return {{"entries", arr}};
}

std::vector<BenchSummaryEntry> summary_from_json(const nlohmann::json& doc) {
  std::vector<BenchSummaryEntry> entries;
  for (const auto& rec : doc.value("entries", nlohmann::json::array())) {
    BenchSummaryEntry e;
    e.hardware_tag = rec.value("hardware", std::string("local"));
    e.backend_id = rec.value("backend_id", std::string());
    e.model_id = rec.value("model_id", std::string());
    e.failed = rec.value("failed", false);
    if (rec.contains("stats")) e.stats = stats_from_json(rec["stats"]);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<BenchSummaryEntry> load_summary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open summary file: " + path.string());
  nlohmann::json doc;
  in >> doc;
  return summary_from_json(doc);
}

void merge_into_summary_file(const BenchSummaryEntry& entry, const std::filesystem::path& path) {
  std::vector<BenchSummaryEntry> entries;
  if (std::filesystem::exists(path)) entries = load_summary_file(path);

  auto same_key = [&entry](const BenchSummaryEntry& e) {
    return e.hardware_tag == entry.hardware_tag && e.backend_id == entry.backend_id &&
           e.model_id == entry.model_id;
  };
  if (auto it = std::find_if(entries.begin(), entries.end(), same_key); it != entries.end()) {
    *it = entry;
  } else {
    entries.push_back(entry);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary file: " + path.string());
  out << summary_to_json(entries).dump(2) << "\n";
}

CompareReport compare_report(const std::vector<BenchSummaryEntry>& entries,
                             const std::vector<ReferenceLatency>& references) {
  if (entries.empty()) throw std::invalid_argument("no benchmark entries to compare");

  CompareReport report;
  report.table_csv =
      "hardware,backend_id,model_id,samples_used,discarded_warmup,mean_ms,std_ms,min_ms,max_ms,"
      "failed\n";
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%d,%.4f,%.4f,%.4f,%.4f,%s\n",
                  e.hardware_tag.c_str(), e.backend_id.c_str(), e.model_id.c_str(),
                  e.stats.samples_used, e.stats.discarded_warmup, e.stats.mean_ms, e.stats.std_ms,
                  e.stats.min_ms, e.stats.max_ms, e.failed ? "yes" : "no");
    report.table_csv += buf;
  }

  std::vector<svg::LogChartEntry> bars;
  for (const auto& e : entries) {
    if (e.stats.mean_ms > 0.0) {
      bars.push_back({e.hardware_tag, e.model_id, e.stats.mean_ms});
    }
  }
  std::vector<svg::ReferenceLine> lines;
  for (const auto& r : references) lines.push_back({r.name, r.mean_ms});
  if (!bars.empty()) {
    report.chart_svg = svg::log_bar_chart("Mean inference latency by hardware and model",
                                          "latency (ms, log scale)", bars, lines);
  }
  return report;
}

}  // namespace parkvision
