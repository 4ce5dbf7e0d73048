// itmlut: SDR to HDR/WCG conversion with luma-branch adaptive 3D LUTs.
//
//   itmlut init-bundle --out b.itmlut [--init table3] [--ocio2 a.cube] [--davinci b.cube]
//   itmlut apply --bundle b.itmlut --input sdr.ppm --output hdr.ppm
//   itmlut metrics --test hdr.ppm --reference gt.ppm
//   itmlut bench [--bundle b.itmlut] --resolutions HD,UHD
//   itmlut dump-luts --bundle b.itmlut --input sdr.ppm --out-prefix lut
//   itmlut inspect --bundle b.itmlut
//
// Exit codes: 0 success, 2 parse error, 3 validation error, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "itmlut/bench.hpp"
#include "itmlut/bundle.hpp"
#include "itmlut/error.hpp"
#include "itmlut/image_io.hpp"
#include "itmlut/metrics.hpp"
#include "itmlut/pipeline.hpp"
#include "json.hpp"

namespace {

using namespace itm;

struct ContributionFlags {
  std::optional<std::string> mode;
  std::optional<double> t_b, t_d, mu;

  void add(CLI::App* cmd) {
    cmd->add_option("--contribution", mode, "Contribution map: eq3 | soft | hard | constant")
        ->check(CLI::IsMember({"eq3", "soft", "hard", "constant"}));
    cmd->add_option("--tb", t_b, "Bright threshold");
    cmd->add_option("--td", t_d, "Dark threshold");
    cmd->add_option("--mu", mu, "Soft-curve strength");
  }

  bool any() const { return mode || t_b || t_d || mu; }

  ContributionParams resolve(ContributionParams base) const {
    if (mode) {
      const ContributionMode m = parse_contribution_mode(*mode);
      base = m == ContributionMode::Hard ? ContributionParams::hard() : ContributionParams{};
      base.mode = m;
    }
    if (t_b) base.t_b = *t_b;
    if (t_d) base.t_d = *t_d;
    if (mu) base.mu = *mu;
    base.validate();
    return base;
  }
};

Bundle read_bundle(const std::string& path) { return load_bundle(read_file(path)); }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

template <typename T>
std::vector<T> split_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      std::size_t used = 0;
      T v{};
      try {
        if constexpr (std::is_floating_point_v<T>) v = static_cast<T>(std::stod(item, &used));
        else v = static_cast<T>(std::stoul(item, &used));
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw Error(ErrorCode::InvalidArgument, "bad list element '" + item + "'");
      out.push_back(v);
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"SDR to HDR/WCG inverse tone mapping with adaptive 3D LUTs"};
  app.require_subcommand(1);

  // init-bundle
  auto* init = app.add_subcommand("init-bundle", "Write an initialization bundle");
  std::string init_out, init_scheme = "table3", ocio2, davinci, init_vertices = "eq2", init_weights = "1,0,0,0,0";
  std::size_t init_n = 17;
  std::optional<std::uint64_t> init_seed;
  double init_scale = 1.0;
  bool sdr_bt1886 = false;
  ContributionFlags init_contrib;
  init->add_option("--out", init_out, "Output bundle path")->required();
  init->add_option("--n", init_n, "Lattice size per axis")->check(CLI::Range(2, 65));
  init->add_option("--init", init_scheme, "Basis initialization: table3 | c100x5 | identity-ones")
      ->check(CLI::IsMember({"table3", "c100x5", "identity-ones"}));
  init->add_option("--ocio2", ocio2, "Cube file for basis slot 1");
  init->add_option("--davinci", davinci, "Cube file for basis slot 3");
  init->add_option("--vertices", init_vertices, "Vertex mode: eq2 | uniform | file")
      ->check(CLI::IsMember({"eq2", "uniform", "file"}));
  init->add_option("--weights", init_weights, "Constant predictor output w0..w4");
  init->add_option("--random-seed", init_seed, "Random predictor parameters from this seed");
  init->add_option("--random-scale", init_scale, "Scale of random predictor parameters");
  init->add_flag("--sdr-gamma-2.4", sdr_bt1886, "Decode SDR with exponent 2.4 instead of 1/0.45");
  init_contrib.add(init);

  // apply
  auto* apply_cmd = app.add_subcommand("apply", "Convert an SDR frame to HDR/WCG");
  std::string apply_bundle, apply_in, apply_out, apply_vertices, apply_format, apply_conv = "sdr";
  unsigned apply_threads = 0;
  bool apply_strict = false;
  ContributionFlags apply_contrib;
  apply_cmd->add_option("--bundle", apply_bundle)->required();
  apply_cmd->add_option("--input", apply_in)->required();
  apply_cmd->add_option("--output", apply_out)->required();
  apply_cmd->add_option("--format", apply_format, "Output format: ppm | raw | png (default: from extension)")
      ->check(CLI::IsMember({"ppm", "raw", "png"}));
  apply_cmd->add_option("--vertices", apply_vertices, "Override vertex mode: eq2 | uniform | file")
      ->check(CLI::IsMember({"eq2", "uniform", "file"}));
  apply_cmd->add_option("--threads", apply_threads, "Worker threads (0 = all cores)");
  apply_cmd->add_option("--input-convention", apply_conv, "Convention when the input has no sidecar");
  apply_cmd->add_flag("--strict", apply_strict, "Reject out-of-range input samples instead of clamping");
  apply_contrib.add(apply_cmd);

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Score an HDR frame against a reference");
  std::string m_test, m_ref, m_out;
  metrics_cmd->add_option("--test", m_test)->required();
  metrics_cmd->add_option("--reference", m_ref)->required();
  metrics_cmd->add_option("--out", m_out, "JSON report path (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Measure single-frame runtime");
  std::string b_bundle, b_res = "HD,UHD", b_scaling = "1,2,4,8", b_out;
  BenchOptions bopts;
  bench_cmd->add_option("--bundle", b_bundle, "Bundle to benchmark (default: table3 init, random predictor)");
  bench_cmd->add_option("--resolutions", b_res, "Comma list of HD, UHD or WxH");
  bench_cmd->add_option("--iterations", bopts.iterations)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", bopts.warmup)->check(CLI::Range(3, 1000));
  bench_cmd->add_option("--threads", bopts.threads, "Worker threads for the timed runs (0 = all cores)");
  bench_cmd->add_option("--scaling", b_scaling, "Thread counts for the render scaling curve ('' to skip)");
  bench_cmd->add_option("--out", b_out, "JSON report path (default stdout)");

  // dump-luts
  auto* dump_cmd = app.add_subcommand("dump-luts", "Write the merged branch LUTs as .cube files");
  std::string d_bundle, d_input, d_means, d_weights, d_prefix = "itmlut", d_vertices;
  std::size_t d_size = 33;
  dump_cmd->add_option("--bundle", d_bundle)->required();
  dump_cmd->add_option("--input", d_input, "SDR frame providing means and predicted weights");
  dump_cmd->add_option("--means", d_means, "Channel means r,g,b (instead of --input)");
  dump_cmd->add_option("--weights", d_weights, "15 merge weights, bright/middle/dark (instead of the predictor)");
  dump_cmd->add_option("--size", d_size, "Uniform cube size")->check(CLI::Range(2, 129));
  dump_cmd->add_option("--out-prefix", d_prefix);
  dump_cmd->add_option("--vertices", d_vertices)->check(CLI::IsMember({"eq2", "uniform", "file"}));

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a bundle");
  std::string i_bundle;
  inspect_cmd->add_option("--bundle", i_bundle)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  if (*init) {
    InitOptions o;
    o.n = init_n;
    o.scheme = parse_init_scheme(init_scheme);
    if (!ocio2.empty()) {
      const auto b = read_file(ocio2);
      o.ocio2 = parse_cube(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
    }
    if (!davinci.empty()) {
      const auto b = read_file(davinci);
      o.davinci = parse_cube(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
    }
    o.vertex_mode = parse_vertex_mode(init_vertices);
    o.contribution = init_contrib.resolve(ContributionParams{});
    o.sdr_exponent = sdr_bt1886 ? kSdrDecodeExponentBt1886 : kSdrDecodeExponent;
    const auto w = split_list<double>(init_weights);
    if (w.size() != kBasisPerBranch) throw Error(ErrorCode::InvalidArgument, "--weights needs 5 values");
    for (std::size_t i = 0; i < w.size(); ++i) o.constant_weights[i] = static_cast<float>(w[i]);
    o.random_seed = init_seed;
    o.random_scale = init_scale;
    const InitResult r = make_init_bundle(o);
    if (o.scheme == InitScheme::Table3)
      for (const auto& warning : r.warnings) std::cerr << "warning: " << warning << "\n";
    write_file(init_out, save_bundle(r.bundle));
    return 0;
  }

  if (*apply_cmd) {
    const Bundle bundle = read_bundle(apply_bundle);
    const std::uint64_t clamped_on_load = clamp_count();
    const Frame x = load_frame(apply_in, parse_convention(apply_conv));
    // The float reader already clamped; strict mode rejects instead.
    if (apply_strict && clamp_count() != clamped_on_load)
      throw Error(ErrorCode::InvalidArgument, "input holds " + std::to_string(clamp_count() - clamped_on_load) +
                                                  " samples outside [0,1]");
    PipelineConfig cfg;
    cfg.threads = apply_threads;
    cfg.clamp = apply_strict ? ClampPolicy::Strict : ClampPolicy::Clamp;
    if (!apply_vertices.empty()) cfg.vertex_mode = parse_vertex_mode(apply_vertices);
    if (apply_contrib.any()) cfg.contribution = apply_contrib.resolve(bundle.contribution);
    const Frame y = apply(x, bundle, cfg);
    const FrameFormat fmt = apply_format.empty() ? format_from_path(apply_out) : parse_frame_format(apply_format);
    write_file(apply_out, write_frame(y, fmt));
    write_sidecar(apply_out, y);
    if (const auto clamped = clamp_count() - clamped_on_load)
      std::cerr << "note: " << clamped << " samples clamped into [0,1]\n";
    return 0;
  }

  if (*metrics_cmd) {
    const Frame a = load_frame(m_test, SignalConvention::HdrPq2020);
    const Frame b = load_frame(m_ref, SignalConvention::HdrPq2020);
    write_text(m_out, to_json(evaluate(a, b)));
    return 0;
  }

  if (*bench_cmd) {
    bopts.resolutions.clear();
    for (const auto& r : split_list<std::string>(b_res)) bopts.resolutions.push_back(parse_resolution(r));
    bopts.scaling_threads = split_list<unsigned>(b_scaling);
    Bundle bundle;
    if (b_bundle.empty()) {
      InitOptions o;
      o.random_seed = 1;
      bundle = make_init_bundle(o).bundle;
    } else {
      bundle = read_bundle(b_bundle);
    }
    write_text(b_out, to_json(run_bench(bundle, bopts)));
    return 0;
  }

  if (*dump_cmd) {
    const Bundle bundle = read_bundle(d_bundle);
    const VertexMode mode = d_vertices.empty() ? bundle.vertex_mode : parse_vertex_mode(d_vertices);
    ChannelMeans means;
    std::array<BranchWeights, 3> weights{};
    if (!d_input.empty()) {
      const Frame x = load_frame(d_input, SignalConvention::SdrGamma709);
      PipelineConfig cfg;
      cfg.vertex_mode = mode;
      const FrameAnalysis a = analyze(x, bundle, cfg);
      means = a.means;
      weights = a.weights;
    } else if (d_means.empty() || d_weights.empty()) {
      throw Error(ErrorCode::InvalidArgument, "dump-luts needs --input, or both --means and --weights");
    }
    if (!d_means.empty()) {
      const auto m = split_list<double>(d_means);
      if (m.size() != 3) throw Error(ErrorCode::InvalidArgument, "--means needs 3 values");
      means = {m[0], m[1], m[2]};
    }
    if (!d_weights.empty()) {
      const auto w = split_list<double>(d_weights);
      if (w.size() != 3 * kBasisPerBranch) throw Error(ErrorCode::InvalidArgument, "--weights needs 15 values");
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t i = 0; i < kBasisPerBranch; ++i) weights[b][i] = w[b * kBasisPerBranch + i];
    }
    const auto cubes = dump_luts(bundle, mode, means, weights, d_size);
    for (BranchId b : kBranches) {
      const std::string text = write_cube(cubes[index_of(b)]);
      const std::string path = d_prefix + "_" + std::string(to_string(b)) + ".cube";
      write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
      std::cout << path << "\n";
    }
    return 0;
  }

  if (*inspect_cmd) {
    const auto bytes = read_file(i_bundle);
    const Bundle b = load_bundle(bytes);
    nlohmann::ordered_json j;
    j["version"] = b.version;
    j["n"] = b.n;
    j["vertex_mode"] = std::string(to_string(b.vertex_mode));
    j["contribution"] = {{"mode", std::string(to_string(b.contribution.mode))},
                         {"t_b", b.contribution.t_b},
                         {"t_d", b.contribution.t_d},
                         {"mu", b.contribution.mu}};
    j["notes"] = b.notes;
    j["predictor_parameters_per_branch"] = b.predictor[0].parameter_count();
    nlohmann::ordered_json sums;
    char hex[17];
    for (const auto& [name, sum] : tensor_checksums(bytes)) {
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(sum));
      sums[name] = hex;
    }
    j["tensor_count"] = sums.size();
    j["tensor_fnv1a64"] = sums;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const itm::Error& e) {
    std::cerr << "error (" << itm::to_string(e.code()) << "): " << e.what() << "\n";
    return itm::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
