#include <cmath>
#include <random>

#include "doctest.h"
#include "itmlut/bench.hpp"
#include "itmlut/cube.hpp"
#include "itmlut/error.hpp"
#include "itmlut/pipeline.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace itm;

namespace {

Bundle identity_bundle(std::size_t n) {
  InitOptions o;
  o.n = n;
  o.scheme = InitScheme::IdentityPlusOnes;
  o.vertex_mode = VertexMode::Uniform;
  o.contribution.mode = ContributionMode::Constant;
  Bundle b = make_init_bundle(o).bundle;
  for (auto& branch : b.basis) branch[4] = LutContent::identity(n);
  return b;
}

double max_diff(const Frame& a, const Frame& b) {
  double worst = 0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.pixel_count(); ++i)
      worst = std::max(worst, std::abs(static_cast<double>(a.planes[c][i]) - b.planes[c][i]));
  return worst;
}

}  // namespace

TEST_CASE("identity bundle reproduces the input") {
  std::mt19937_64 rng(1);
  const Frame x = oracle::random_frame(300, 200, rng);
  const Frame y = apply(x, identity_bundle(17), PipelineConfig{});
  CHECK(y.convention == SignalConvention::HdrPq2020);
  CHECK(max_diff(x, y) <= 1e-6);
}

TEST_CASE("equal branches give the plain diffuse-white conversion") {
  std::mt19937_64 rng(2);
  InitOptions o;
  o.n = 17;
  o.scheme = InitScheme::C100x5;
  const Bundle b = make_init_bundle(o).bundle;
  const Frame x = oracle::random_frame(64, 48, rng);
  const Lut3D c100(make_init_basis(InitBasis::C100DW, 17), VertexGrid::uniform(17));
  for (int mode = 0; mode < 4; ++mode) {
    PipelineConfig cfg;
    cfg.vertex_mode = VertexMode::Uniform;
    cfg.contribution = ContributionParams{};
    cfg.contribution->mode = static_cast<ContributionMode>(mode);
    const Frame y = apply(x, b, cfg);
    double worst = 0;
    for (std::size_t i = 0; i < x.pixel_count(); ++i) {
      const Rgb ref = lookup(c100, {x.planes[0][i], x.planes[1][i], x.planes[2][i]});
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(y.planes[c][i] - ref[c]));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("apply matches the straight-line reference") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const Bundle b = oracle::random_bundle(5 + trial * 6, rng, trial == 2);
    const Frame x = oracle::random_frame(64, 64, rng);
    const Frame y = apply(x, b, PipelineConfig{});
    const Frame ref = oracle::convert(x, b, b.vertex_mode, b.contribution);
    CHECK(max_diff(y, ref) <= 1e-5);
  }
}

TEST_CASE("thread count never changes the output") {
  std::mt19937_64 rng(4);
  const Bundle b = oracle::random_bundle(17, rng, false);
  const Frame x = oracle::random_frame(333, 271, rng);
  PipelineConfig cfg;
  const Frame y1 = apply(x, b, cfg);
  for (unsigned t : {2u, 4u, 8u}) {
    cfg.threads = t;
    CHECK(apply(x, b, cfg) == y1);
  }
  CHECK(apply(x, b, PipelineConfig{}) == y1);
}

TEST_CASE("dark samples never see the bright branch") {
  std::mt19937_64 rng(5);
  Bundle b = oracle::random_bundle(9, rng, false);
  b.contribution = ContributionParams{};
  Bundle other = b;
  for (auto& lut : other.basis[index_of(BranchId::Bright)]) lut = oracle::random_lut(9, rng, -5.0f, 5.0f);
  const Frame x = oracle::random_frame(128, 128, rng);
  const Frame y1 = apply(x, b, PipelineConfig{});
  const Frame y2 = apply(x, other, PipelineConfig{});
  std::size_t dark_pixels = 0, changed_elsewhere = 0;
  for (std::size_t i = 0; i < x.pixel_count(); ++i) {
    const bool dark = x.planes[0][i] <= 0.45f && x.planes[1][i] <= 0.45f && x.planes[2][i] <= 0.45f;
    for (int c = 0; c < 3; ++c) {
      if (x.planes[c][i] <= b.contribution.t_b) REQUIRE(y1.planes[c][i] == y2.planes[c][i]);
      else if (y1.planes[c][i] != y2.planes[c][i]) ++changed_elsewhere;
    }
    if (dark) {
      ++dark_pixels;
      for (int c = 0; c < 3; ++c) REQUIRE(y1.planes[c][i] == y2.planes[c][i]);
    }
  }
  CHECK(dark_pixels > 100);
  CHECK(changed_elsewhere > 100);
}

TEST_CASE("input checks and stage context") {
  std::mt19937_64 rng(6);
  const Bundle b = identity_bundle(5);
  Frame pq = oracle::random_frame(16, 16, rng, SignalConvention::HdrPq2020);
  CHECK_THROWS_AS(apply(pq, b, PipelineConfig{}), Error);

  PipelineConfig file_mode;
  file_mode.vertex_mode = VertexMode::FromFile;
  CHECK_THROWS_AS(apply(oracle::random_frame(16, 16, rng), b, file_mode), Error);

  PipelineConfig bad;
  bad.contribution = ContributionParams{ContributionMode::LinearEq3, 0.3, 0.6, 1};
  CHECK_THROWS_AS(bad.validate(b), Error);

  Frame outside = oracle::random_frame(16, 16, rng);
  outside.planes[1][3] = 1.5f;
  PipelineConfig strict;
  strict.clamp = ClampPolicy::Strict;
  CHECK_THROWS_AS(apply(outside, b, strict), Error);
  CHECK_NOTHROW(apply(outside, b, PipelineConfig{}));

  try {
    apply(oracle::random_frame(4, 4, rng), b, PipelineConfig{});
    FAIL("tiny frame accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("stage predict") == 0);
  }
}

TEST_CASE("channel means use the clamped frame") {
  Frame x(2, 1, SignalConvention::SdrGamma709);
  x.planes[0] = {-1.0f, 0.5f};
  x.planes[1] = {2.0f, 0.5f};
  x.planes[2] = {0.25f, 0.75f};
  const ChannelMeans m = channel_means(x);
  CHECK(m.r == doctest::Approx(0.25));
  CHECK(m.g == doctest::Approx(0.75));
  CHECK(m.b == doctest::Approx(0.5));
}

TEST_CASE("dumped LUTs") {
  const Bundle id = identity_bundle(9);
  const std::array<BranchWeights, 3> w{{{1, 0, 0, 0, 0}, {1, 0, 0, 0, 0}, {1, 0, 0, 0, 0}}};
  const auto cubes = dump_luts(id, VertexMode::Uniform, {0.3, 0.5, 0.7}, w, 17);
  const CubeFile ref = cube_from_lut(LutContent::identity(17));
  for (const auto& c : cubes) {
    REQUIRE(c.data.size() == ref.data.size());
    for (std::size_t k = 0; k < c.data.size(); ++k) REQUIRE(std::abs(c.data[k] - ref.data[k]) <= 1e-6);
  }

  InitOptions o;
  o.scheme = InitScheme::C100x5;
  const auto same = dump_luts(make_init_bundle(o).bundle, VertexMode::Uniform, {0.3, 0.5, 0.7}, w, 9);
  CHECK(same[0].data == same[1].data);
  CHECK(same[1].data == same[2].data);
}

namespace {

// Direct apply vs rendering the dumped cubes after a text round trip.
struct ReapplyError {
  double worst;
  double over_fraction;  // share of samples beyond 2/1023
};

ReapplyError reapply(const Bundle& b, const Frame& x, std::size_t size) {
  const FrameAnalysis a = analyze(x, b, PipelineConfig{});
  const Frame direct = apply(x, b, PipelineConfig{});
  const auto cubes = dump_luts(b, b.vertex_mode, a.means, a.weights, size);
  std::vector<Lut3D> luts;
  for (const auto& c : cubes) {
    const CubeFile back = parse_cube(write_cube(c));
    luts.emplace_back(resample_cube(back, back.size), VertexGrid::uniform(back.size));
  }
  const Frame again = render(x, luts, b.contribution, 1);
  std::size_t over = 0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < x.pixel_count(); ++i)
      if (std::abs(direct.planes[c][i] - again.planes[c][i]) > 2.0 / 1023) ++over;
  return {max_diff(direct, again), static_cast<double>(over) / (3.0 * x.pixel_count())};
}

Bundle dump_test_bundle(VertexMode mode) {
  InitOptions o;
  o.random_seed = 5;
  o.vertex_mode = mode;
  Bundle b = make_init_bundle(o).bundle;
  for (auto& p : b.predictor)
    for (float& v : p.fc.bias) v += 0.2f;
  return b;
}

}  // namespace

TEST_CASE("dumped LUTs re-applied match apply within 2/1023 on uniform grids") {
  std::mt19937_64 rng(7);
  const Frame x = oracle::random_frame(96, 80, rng);
  const Bundle b = dump_test_bundle(VertexMode::Uniform);
  for (std::size_t size : {17u, 33u, 65u}) CHECK(reapply(b, x, size).worst <= 2.0 / 1023);
}

TEST_CASE("dumps of redistributed grids converge with cube size") {
  // Redistributed vertices can be far denser than any uniform lattice, so a
  // .cube export is lossy there; the error shrinks as the cube grows.
  std::mt19937_64 rng(7);
  const Frame x = oracle::random_frame(96, 80, rng);
  const Bundle b = dump_test_bundle(VertexMode::Eq2);
  const ReapplyError e33 = reapply(b, x, 33), e129 = reapply(b, x, 129), e256 = reapply(b, x, 256);
  CHECK(e129.over_fraction < e33.over_fraction);
  CHECK(e256.over_fraction < e129.over_fraction);
  CHECK(e256.worst < e33.worst);
  CHECK(e256.over_fraction < 0.01);
}

TEST_CASE("bench report") {
  InitOptions o;
  o.n = 9;
  const Bundle b = make_init_bundle(o).bundle;
  BenchOptions opts;
  opts.resolutions = {parse_resolution("64x48"), parse_resolution("128x96")};
  opts.iterations = 2;
  opts.scaling_threads = {1, 2};
  const BenchReport r = run_bench(b, opts);
  REQUIRE(r.results.size() == 2);
  CHECK(r.results[0].wall_seconds.size() == 2);
  CHECK(r.scaling.size() == 2);
  CHECK(r.peak_rss_kib > 0);
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["note"].get<std::string>().find("GPU") != std::string::npos);
  CHECK(j["resolutions"][1]["stages"].contains("render"));
  opts.warmup = 2;
  CHECK_THROWS_AS(run_bench(b, opts), Error);
  CHECK_THROWS_AS(parse_resolution("4x4"), Error);
  CHECK(parse_resolution("UHD").width == 3840);
}
