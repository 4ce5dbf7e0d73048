#include "itmlut/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "itmlut/error.hpp"
#include "json.hpp"

namespace itm {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

long peak_rss_kib() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

}  // namespace

Resolution parse_resolution(const std::string& s) {
  if (s == "HD") return {"HD", 1920, 1080};
  if (s == "UHD") return {"UHD", 3840, 2160};
  const auto x = s.find('x');
  if (x != std::string::npos) {
    try {
      const int w = std::stoi(s.substr(0, x));
      const int h = std::stoi(s.substr(x + 1));
      if (w >= 8 && h >= 8) return {s, w, h};
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::InvalidArgument, "bad resolution '" + s + "' (use HD, UHD or WxH)");
}

Frame synthetic_sdr_frame(int width, int height, std::uint64_t seed) {
  Frame f(width, height, SignalConvention::SdrGamma709);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(-0.05f, 0.05f);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const float u = static_cast<float>(x) / static_cast<float>(width - 1);
      const float v = static_cast<float>(y) / static_cast<float>(height - 1);
      const float base[3] = {u, v, 0.5f * (u + v)};
      for (int c = 0; c < 3; ++c) f.at(c, x, y) = std::clamp(base[c] + noise(rng), 0.0f, 1.0f);
    }
  return f;
}

BenchReport run_bench(const Bundle& bundle, const BenchOptions& o) {
  if (o.warmup < 3) throw Error(ErrorCode::InvalidArgument, "bench needs at least 3 warmup iterations");
  if (o.iterations < 1) throw Error(ErrorCode::InvalidArgument, "bench needs at least 1 measured iteration");

  BenchReport report;
  report.hardware_threads = std::thread::hardware_concurrency();
  PipelineConfig cfg;
  cfg.threads = o.threads;

  const Resolution* largest = nullptr;
  for (const Resolution& res : o.resolutions) {
    const Frame x = synthetic_sdr_frame(res.width, res.height, o.seed);
    ResolutionResult r;
    r.resolution = res;
    std::array<std::vector<double>, 5> stage_samples;
    for (int it = 0; it < o.warmup + o.iterations; ++it) {
      StageTimings t;
      const auto t0 = std::chrono::steady_clock::now();
      const Frame y = apply(x, bundle, cfg, &t);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (it < o.warmup) continue;
      r.wall_seconds.push_back(wall);
      stage_samples[0].push_back(t.means);
      stage_samples[1].push_back(t.vertices);
      stage_samples[2].push_back(t.predict);
      stage_samples[3].push_back(t.merge);
      stage_samples[4].push_back(t.render);
    }
    r.median_seconds = median(r.wall_seconds);
    r.stages = {median(stage_samples[0]), median(stage_samples[1]), median(stage_samples[2]),
                median(stage_samples[3]), median(stage_samples[4])};
    if (r.wall_seconds.size() >= 2) {
      const auto mid = r.wall_seconds.begin() + static_cast<std::ptrdiff_t>(r.wall_seconds.size() / 2);
      const double a = median({r.wall_seconds.begin(), mid});
      const double b = median({mid, r.wall_seconds.end()});
      r.half_to_half_variation = std::abs(a - b) / std::max(a, b);
    }
    report.results.push_back(std::move(r));
    if (!largest || res.width * res.height > largest->width * largest->height) largest = &res;
  }

  if (largest && !o.scaling_threads.empty()) {
    const Frame x = synthetic_sdr_frame(largest->width, largest->height, o.seed);
    const FrameAnalysis a = analyze(x, bundle, cfg);
    for (unsigned threads : o.scaling_threads) {
      std::vector<double> samples;
      for (int it = 0; it < std::max(3, o.iterations); ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const Frame y = render(x, a.luts, bundle.contribution, threads);
        samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      report.scaling.push_back({threads, median(samples)});
    }
  }
  report.peak_rss_kib = peak_rss_kib();
  return report;
}

std::string to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["note"] =
      "CPU wall-clock measurements, report-only. The reference 0.254 s UHD figure was measured on a GPU and is "
      "not reproducible on CPU.";
  j["hardware_threads"] = r.hardware_threads;
  j["peak_rss_kib"] = r.peak_rss_kib;
  j["resolutions"] = nlohmann::ordered_json::array();
  for (const auto& res : r.results) {
    nlohmann::ordered_json e;
    e["name"] = res.resolution.name;
    e["width"] = res.resolution.width;
    e["height"] = res.resolution.height;
    e["median_seconds"] = res.median_seconds;
    e["wall_seconds"] = res.wall_seconds;
    e["half_to_half_variation"] = res.half_to_half_variation;
    e["stages"] = {{"means", res.stages.means},     {"vertices", res.stages.vertices},
                   {"predict", res.stages.predict}, {"merge", res.stages.merge},
                   {"render", res.stages.render}};
    j["resolutions"].push_back(e);
  }
  j["render_thread_scaling"] = nlohmann::ordered_json::array();
  for (const auto& p : r.scaling)
    j["render_thread_scaling"].push_back({{"threads", p.threads}, {"median_render_seconds", p.median_render_seconds}});
  for (std::size_t i = 0; i + 1 < r.results.size(); ++i)
    if (r.results[i].resolution.name == "HD" && r.results[i + 1].resolution.name == "UHD")
      j["uhd_over_hd_median_ratio"] = r.results[i + 1].median_seconds / r.results[i].median_seconds;
  return j.dump(2);
}

}  // namespace itm
