#include "itmlut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "itmlut/error.hpp"

namespace itm {

namespace {

constexpr int kTileRows = 64;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(std::string("stage ") + name);
  }
}

unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void PipelineConfig::validate(const Bundle& bundle) const {
  if (vertex_mode == VertexMode::FromFile && !bundle.fixed_vertices)
    throw Error(ErrorCode::InvalidArgument, "vertex mode 'file' requested but the bundle has no fixed vertices");
  if (contribution) contribution->validate();
}

ChannelMeans channel_means(const Frame& x) {
  std::array<double, 3> mean{};
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (float v : x.planes[c]) s += std::clamp(static_cast<double>(v), 0.0, 1.0);
    mean[c] = x.pixel_count() ? s / static_cast<double>(x.pixel_count()) : 0.0;
  }
  return {mean[0], mean[1], mean[2]};
}

VertexGrid branch_vertices(const Bundle& bundle, VertexMode mode, BranchId branch, const ChannelMeans& means) {
  switch (mode) {
    case VertexMode::Eq2: return gen_vertices(branch, bundle.n, means);
    case VertexMode::Uniform: return VertexGrid::uniform(bundle.n);
    case VertexMode::FromFile:
      if (!bundle.fixed_vertices) throw Error(ErrorCode::InvalidArgument, "bundle has no fixed vertices");
      return (*bundle.fixed_vertices)[index_of(branch)];
  }
  throw Error(ErrorCode::InvalidArgument, "unknown vertex mode");
}

FrameAnalysis analyze(const Frame& x, const Bundle& bundle, const PipelineConfig& cfg, StageTimings* timings) {
  cfg.validate(bundle);
  if (x.convention != SignalConvention::SdrGamma709)
    throw Error(ErrorCode::InvalidArgument, "apply expects an SDR (gamma/BT.709) input frame");
  if (cfg.clamp == ClampPolicy::Strict)
    for (const auto& plane : x.planes)
      for (float v : plane)
        if (!(v >= 0.0f && v <= 1.0f))
          throw Error(ErrorCode::InvalidArgument, "input sample outside [0,1] under strict clamp policy");

  const VertexMode mode = cfg.vertex_mode.value_or(bundle.vertex_mode);
  FrameAnalysis a;
  StageTimings local;

  auto t0 = Clock::now();
  a.means = stage("means", [&] { return channel_means(x); });
  local.means = seconds_since(t0);

  t0 = Clock::now();
  std::vector<VertexGrid> grids = stage("vertices", [&] {
    std::vector<VertexGrid> g;
    for (BranchId b : kBranches) g.push_back(branch_vertices(bundle, mode, b, a.means));
    return g;
  });
  local.vertices = seconds_since(t0);

  t0 = Clock::now();
  stage("predict", [&] {
    const Frame small = downsample(x);
    for (BranchId b : kBranches) a.weights[index_of(b)] = predict_weights(small, bundle.predictor[index_of(b)]);
    return 0;
  });
  local.predict = seconds_since(t0);

  t0 = Clock::now();
  stage("merge", [&] {
    for (BranchId b : kBranches) {
      const std::size_t i = index_of(b);
      a.luts.emplace_back(merge_luts(bundle.basis[i], a.weights[i]), grids[i]);
    }
    return 0;
  });
  local.merge = seconds_since(t0);

  if (timings) *timings = local;
  return a;
}

Frame render(const Frame& x, const std::vector<Lut3D>& luts, const ContributionParams& contribution,
             unsigned threads) {
  if (luts.size() != 3) throw Error(ErrorCode::InvalidArgument, "render needs one LUT per branch");
  contribution.validate();
  Frame out(x.width, x.height, SignalConvention::HdrPq2020);
  const int tiles = (x.height + kTileRows - 1) / kTileRows;
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    try {
      for (int tile = next++; tile < tiles && !failed; tile = next++) {
        const std::size_t begin = static_cast<std::size_t>(tile) * kTileRows * x.width;
        const std::size_t end =
            static_cast<std::size_t>(std::min(x.height, (tile + 1) * kTileRows)) * x.width;
        for (std::size_t i = begin; i < end; ++i) {
          const Rgb rgb{x.planes[0][i], x.planes[1][i], x.planes[2][i]};
          const Rgb yb = lookup(luts[0], rgb);
          const Rgb ym = lookup(luts[1], rgb);
          const Rgb yd = lookup(luts[2], rgb);
          for (int c = 0; c < 3; ++c)
            out.planes[c][i] = fuse_sample(contribution_at(rgb[c], contribution), yb[c], ym[c], yd[c]);
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };

  const unsigned n = std::min<unsigned>(effective_threads(threads), static_cast<unsigned>(std::max(tiles, 1)));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

Frame apply(const Frame& x, const Bundle& bundle, const PipelineConfig& cfg, StageTimings* timings) {
  StageTimings local;
  const FrameAnalysis a = analyze(x, bundle, cfg, &local);
  const ContributionParams contribution = cfg.contribution.value_or(bundle.contribution);
  const auto t0 = Clock::now();
  Frame y = stage("render", [&] { return render(x, a.luts, contribution, cfg.threads); });
  local.render = seconds_since(t0);
  if (timings) *timings = local;
  return y;
}

std::array<CubeFile, 3> dump_luts(const Bundle& bundle, VertexMode mode, const ChannelMeans& means,
                                  const std::array<BranchWeights, 3>& weights, std::size_t size) {
  const auto axis = uniform_vertices(size);
  std::array<CubeFile, 3> out;
  for (BranchId b : kBranches) {
    const std::size_t i = index_of(b);
    const Lut3D merged(merge_luts(bundle.basis[i], weights[i]), branch_vertices(bundle, mode, b, means));
    LutContent uniform = LutContent::filled(size, 0.0f);
    for (std::size_t bz = 0; bz < size; ++bz)
      for (std::size_t g = 0; g < size; ++g)
        for (std::size_t r = 0; r < size; ++r) {
          const Rgb y = lookup(merged, {axis[r], axis[g], axis[bz]});
          float* e = uniform.at(r, g, bz);
          for (int c = 0; c < 3; ++c) e[c] = static_cast<float>(y[c]);
        }
    out[i] = cube_from_lut(uniform, "itmlut " + std::string(to_string(b)) + " branch");
  }
  return out;
}

}  // namespace itm
