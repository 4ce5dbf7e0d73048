#include "itmlut/bundle.hpp"

#include <bit>
#include <cmath>
#include <set>

#include "itmlut/error.hpp"
#include "json.hpp"

namespace itm {

using nlohmann::json;

std::string_view to_string(VertexMode m) {
  switch (m) {
    case VertexMode::Eq2: return "eq2";
    case VertexMode::Uniform: return "uniform";
    case VertexMode::FromFile: return "file";
  }
  return "?";
}

VertexMode parse_vertex_mode(std::string_view s) {
  if (s == "eq2") return VertexMode::Eq2;
  if (s == "uniform") return VertexMode::Uniform;
  if (s == "file") return VertexMode::FromFile;
  throw Error(ErrorCode::InvalidArgument, "unknown vertex mode '" + std::string(s) + "'");
}

InitScheme parse_init_scheme(std::string_view s) {
  if (s == "table3") return InitScheme::Table3;
  if (s == "c100x5") return InitScheme::C100x5;
  if (s == "identity-ones") return InitScheme::IdentityPlusOnes;
  throw Error(ErrorCode::InvalidArgument, "unknown init scheme '" + std::string(s) + "'");
}

void Bundle::validate() const {
  if (version != kBundleVersion)
    throw Error(ErrorCode::UnsupportedVersion, "bundle version " + std::to_string(version) + " unsupported");
  if (n < 2) throw Error(ErrorCode::BundleCorruption, "bundle lattice size below 2");
  for (const auto& branch : basis)
    for (const auto& lut : branch)
      if (lut.size() != n) throw Error(ErrorCode::BundleCorruption, "basis LUT size differs from bundle n");
  for (const auto& p : predictor) p.validate();
  if ((vertex_mode == VertexMode::FromFile) != fixed_vertices.has_value())
    throw Error(ErrorCode::BundleCorruption, "fixed vertices must be present exactly in file vertex mode");
  if (fixed_vertices)
    for (const auto& g : *fixed_vertices)
      if (g.size() != n) throw Error(ErrorCode::BundleCorruption, "fixed vertex grid size differs from n");
  try {
    contribution.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::BundleCorruption, e.what());
  }
}

namespace {

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

std::string lut_name(std::size_t branch, std::size_t i) {
  return "lut." + std::string(to_string(kBranches[branch])) + "." + std::to_string(i);
}
std::string pred_name(std::size_t branch, const std::string& leaf) {
  return "predictor." + std::string(to_string(kBranches[branch])) + "." + leaf;
}
std::string vert_name(std::size_t branch) { return "vertices." + std::string(to_string(kBranches[branch])); }

std::vector<TensorRef> collect_tensors(const Bundle& b) {
  std::vector<TensorRef> out;
  const std::size_t n = b.n;
  for (std::size_t br = 0; br < 3; ++br)
    for (std::size_t i = 0; i < kBasisPerBranch; ++i) {
      const auto d = b.basis[br][i].data();
      out.push_back({lut_name(br, i), {n, n, n, 3}, {d.begin(), d.end()}});
    }
  for (std::size_t br = 0; br < 3; ++br) {
    const PredictorWeights& p = b.predictor[br];
    for (std::size_t l = 0; l < arch::kConvLayers; ++l) {
      const ConvLayer& c = p.conv[l];
      const std::string base = "conv" + std::to_string(l);
      out.push_back({pred_name(br, base + ".weight"), {c.out_channels, c.in_channels, arch::kKernel, arch::kKernel}, c.weight});
      out.push_back({pred_name(br, base + ".bias"), {c.out_channels}, c.bias});
    }
    out.push_back({pred_name(br, "fc.weight"), {p.fc.out_features, p.fc.in_features}, p.fc.weight});
    out.push_back({pred_name(br, "fc.bias"), {p.fc.out_features}, p.fc.bias});
  }
  if (b.fixed_vertices)
    for (std::size_t br = 0; br < 3; ++br) {
      TensorRef t{vert_name(br), {3, n}, {}};
      for (std::size_t c = 0; c < 3; ++c)
        for (double v : (*b.fixed_vertices)[br].axis(c)) t.values.push_back(static_cast<float>(v));
      out.push_back(std::move(t));
    }
  return out;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

float get_f32(const std::uint8_t* p) {
  const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

json contribution_to_json(const ContributionParams& c) {
  return {{"mode", std::string(to_string(c.mode))}, {"t_b", c.t_b}, {"t_d", c.t_d}, {"mu", c.mu}};
}

struct ParsedHeader {
  json header;
  std::span<const std::uint8_t> payload;
};

ParsedHeader split(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBundleMagic.size() ||
      std::string_view(reinterpret_cast<const char*>(bytes.data()), kBundleMagic.size()) != kBundleMagic)
    throw Error(ErrorCode::BadMagic, "not an ITM-LUT bundle (magic mismatch)");
  if (bytes.size() < 16) throw Error(ErrorCode::LengthMismatch, "bundle truncated inside the header length");
  const std::uint64_t header_len = get_u64(bytes.subspan(8, 8));
  if (header_len > bytes.size() - 16)
    throw Error(ErrorCode::LengthMismatch, "bundle header length exceeds file size");
  const auto header_bytes = bytes.subspan(16, header_len);

  ParsedHeader out;
  try {
    out.header = json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bundle header is not valid JSON: ") + e.what());
  }
  if (!out.header.is_object()) throw Error(ErrorCode::Parse, "bundle header must be a JSON object");
  const auto version = out.header.value("version", json());
  if (!version.is_number_unsigned() || version.get<std::uint64_t>() != kBundleVersion)
    throw Error(ErrorCode::UnsupportedVersion, "bundle version " + version.dump() + " unsupported");
  const auto pb = out.header.value("payload_bytes", json());
  if (!pb.is_number_unsigned()) throw Error(ErrorCode::BundleCorruption, "payload_bytes missing");
  const std::uint64_t payload_bytes = pb.get<std::uint64_t>();
  const std::uint64_t available = bytes.size() - 16 - header_len;
  if (payload_bytes != available)
    throw Error(ErrorCode::LengthMismatch, "payload declares " + std::to_string(payload_bytes) + " bytes, file has " +
                                               std::to_string(available));
  out.payload = bytes.subspan(16 + header_len);
  return out;
}

struct ManifestEntry {
  std::vector<std::size_t> shape;
  std::uint64_t offset;
  std::uint64_t length;
};

std::map<std::string, ManifestEntry> read_manifest(const json& header, std::size_t payload_size) {
  const auto tensors = header.value("tensors", json());
  if (!tensors.is_array()) throw Error(ErrorCode::BundleCorruption, "tensor manifest missing");
  std::map<std::string, ManifestEntry> out;
  std::uint64_t cursor = 0;
  try {
    for (const auto& t : tensors) {
      ManifestEntry e{t.at("shape").get<std::vector<std::size_t>>(), t.at("offset").get<std::uint64_t>(),
                      t.at("length").get<std::uint64_t>()};
      const std::string name = t.at("name").get<std::string>();
      if (t.value("dtype", std::string("f32le")) != "f32le")
        throw Error(ErrorCode::BundleCorruption, "tensor " + name + " has unsupported dtype");
      std::uint64_t count = 1;
      for (std::size_t d : e.shape) {
        if (d == 0 || d > (1u << 24)) throw Error(ErrorCode::BundleCorruption, "tensor " + name + " has bad shape");
        count *= d;
        if (count > payload_size) throw Error(ErrorCode::LengthMismatch, "tensor " + name + " exceeds payload");
      }
      if (e.length != count * 4)
        throw Error(ErrorCode::LengthMismatch, "tensor " + name + " length disagrees with shape");
      if (e.offset != cursor) throw Error(ErrorCode::LengthMismatch, "tensor " + name + " is not contiguous");
      cursor += e.length;
      if (cursor > payload_size) throw Error(ErrorCode::LengthMismatch, "tensor " + name + " exceeds payload");
      if (!out.emplace(name, std::move(e)).second)
        throw Error(ErrorCode::BundleCorruption, "duplicate tensor " + name);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::BundleCorruption, std::string("malformed tensor manifest: ") + ex.what());
  }
  if (cursor != payload_size) throw Error(ErrorCode::LengthMismatch, "payload has bytes not covered by the manifest");
  return out;
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> save_bundle(const Bundle& bundle) {
  bundle.validate();
  const auto tensors = collect_tensors(bundle);

  json manifest = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t length = t.values.size() * 4;
    manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", "f32le"}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  const json header = {
      {"format", "itmlut-bundle"},
      {"version", bundle.version},
      {"n", bundle.n},
      {"vertex_mode", std::string(to_string(bundle.vertex_mode))},
      {"contribution", contribution_to_json(bundle.contribution)},
      {"notes", bundle.notes},
      {"payload_bytes", offset},
      {"tensors", manifest},
  };
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + offset);
  out.insert(out.end(), kBundleMagic.begin(), kBundleMagic.end());
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : tensors)
    for (float v : t.values) {
      const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
  return out;
}

Bundle load_bundle(std::span<const std::uint8_t> bytes) {
  const ParsedHeader parsed = split(bytes);
  const json& h = parsed.header;
  const auto manifest = read_manifest(h, parsed.payload.size());

  Bundle b;
  try {
    b.n = h.at("n").get<std::size_t>();
    b.vertex_mode = parse_vertex_mode(h.at("vertex_mode").get<std::string>());
    const json& c = h.at("contribution");
    b.contribution.mode = parse_contribution_mode(c.at("mode").get<std::string>());
    b.contribution.t_b = c.at("t_b").get<double>();
    b.contribution.t_d = c.at("t_d").get<double>();
    b.contribution.mu = c.at("mu").get<double>();
    b.notes = h.value("notes", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BundleCorruption, std::string("malformed bundle header: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::BundleCorruption, e.what());
  }
  if (b.n < 2 || b.n > 256) throw Error(ErrorCode::BundleCorruption, "bundle lattice size out of range");

  std::set<std::string> used;
  auto take = [&](const std::string& name, const std::vector<std::size_t>& shape) {
    const auto it = manifest.find(name);
    if (it == manifest.end()) throw Error(ErrorCode::BundleCorruption, "missing tensor " + name);
    if (it->second.shape != shape) throw Error(ErrorCode::BundleCorruption, "tensor " + name + " has unexpected shape");
    used.insert(name);
    std::vector<float> values(it->second.length / 4);
    const std::uint8_t* p = parsed.payload.data() + it->second.offset;
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = get_f32(p + 4 * i);
      if (!std::isfinite(values[i])) throw Error(ErrorCode::NonFinite, "tensor " + name + " holds a non-finite value");
    }
    return values;
  };

  const std::size_t n = b.n;
  for (std::size_t br = 0; br < 3; ++br)
    for (std::size_t i = 0; i < kBasisPerBranch; ++i) b.basis[br][i] = LutContent(n, take(lut_name(br, i), {n, n, n, 3}));
  for (std::size_t br = 0; br < 3; ++br) {
    PredictorWeights& p = b.predictor[br];
    for (std::size_t l = 0; l < arch::kConvLayers; ++l) {
      ConvLayer& c = p.conv[l];
      c.in_channels = arch::kChannels[l];
      c.out_channels = arch::kChannels[l + 1];
      const std::string base = "conv" + std::to_string(l);
      c.weight = take(pred_name(br, base + ".weight"), {c.out_channels, c.in_channels, arch::kKernel, arch::kKernel});
      c.bias = take(pred_name(br, base + ".bias"), {c.out_channels});
    }
    p.fc.in_features = arch::kFcIn;
    p.fc.out_features = arch::kFcOut;
    p.fc.weight = take(pred_name(br, "fc.weight"), {arch::kFcOut, arch::kFcIn});
    p.fc.bias = take(pred_name(br, "fc.bias"), {arch::kFcOut});
  }
  if (b.vertex_mode == VertexMode::FromFile) {
    std::array<std::optional<VertexGrid>, 3> grids;
    for (std::size_t br = 0; br < 3; ++br) {
      const auto v = take(vert_name(br), {3, n});
      std::array<std::vector<double>, 3> axes;
      for (std::size_t c = 0; c < 3; ++c) axes[c].assign(v.begin() + c * n, v.begin() + (c + 1) * n);
      try {
        grids[br].emplace(axes[0], axes[1], axes[2]);
      } catch (const Error& e) {
        throw Error(ErrorCode::BundleCorruption, std::string("fixed vertices: ") + e.what());
      }
    }
    b.fixed_vertices = std::array<VertexGrid, 3>{*grids[0], *grids[1], *grids[2]};
  }
  if (used.size() != manifest.size()) throw Error(ErrorCode::BundleCorruption, "bundle holds unexpected tensors");
  b.validate();
  return b;
}

std::map<std::string, std::uint64_t> tensor_checksums(std::span<const std::uint8_t> bytes) {
  const ParsedHeader parsed = split(bytes);
  std::map<std::string, std::uint64_t> out;
  for (const auto& [name, e] : read_manifest(parsed.header, parsed.payload.size()))
    out[name] = fnv1a(parsed.payload.subspan(e.offset, e.length));
  return out;
}

LutContent make_init_basis(InitBasis which, std::size_t n, double sdr_exponent) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "lattice size must be at least 2");
  switch (which) {
    case InitBasis::Identity: return LutContent::identity(n);
    case InitBasis::AllOnes: return LutContent::filled(n, 1.0f);
    case InitBasis::C100DW:
    case InitBasis::C203DW: break;
  }
  const double white = which == InitBasis::C100DW ? 100.0 : 203.0;
  const auto axis = uniform_vertices(n);
  LutContent lut = LutContent::filled(n, 0.0f);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        const Rgb linear{gamma_decode(axis[r], sdr_exponent), gamma_decode(axis[g], sdr_exponent),
                         gamma_decode(axis[b], sdr_exponent)};
        const Rgb wide = convert_gamut(linear, kBt709ToBt2020);
        float* e = lut.at(r, g, b);
        for (int c = 0; c < 3; ++c) e[c] = static_cast<float>(pq_encode(wide[c] * white));
      }
  return lut;
}

InitResult make_init_bundle(const InitOptions& o) {
  InitResult result;
  Bundle& b = result.bundle;
  b.n = o.n;
  b.vertex_mode = o.vertex_mode;
  b.contribution = o.contribution;

  const LutContent c100 = make_init_basis(InitBasis::C100DW, o.n, o.sdr_exponent);
  const LutContent c203 = make_init_basis(InitBasis::C203DW, o.n, o.sdr_exponent);
  const LutContent identity = make_init_basis(InitBasis::Identity, o.n);

  std::array<LutContent, kBasisPerBranch> slots;
  switch (o.scheme) {
    case InitScheme::Table3: {
      LutContent slot1 = c100, slot3 = c203;
      if (o.ocio2) {
        slot1 = resample_cube(*o.ocio2, o.n);
      } else {
        result.warnings.push_back("no OCIO2 cube supplied; basis slot 1 duplicates C_100DW");
      }
      if (o.davinci) {
        slot3 = resample_cube(*o.davinci, o.n);
      } else {
        result.warnings.push_back("no DaVinci cube supplied; basis slot 3 duplicates C_203DW");
      }
      slots = {c100, slot1, c203, slot3, identity};
      break;
    }
    case InitScheme::C100x5: slots = {c100, c100, c100, c100, c100}; break;
    case InitScheme::IdentityPlusOnes:
      slots = {identity, identity, identity, identity, make_init_basis(InitBasis::AllOnes, o.n)};
      break;
  }
  for (auto& branch : b.basis) branch = slots;

  for (std::size_t br = 0; br < 3; ++br)
    b.predictor[br] = o.random_seed ? PredictorWeights::random(*o.random_seed + br, o.random_scale)
                                    : PredictorWeights::constant(o.constant_weights);

  if (o.vertex_mode == VertexMode::FromFile) {
    // Mean-independent snapshot of the vertex law at mid-grey.
    // Stored as float32, so quantize up front to keep load(save(b)) == b.
    auto snapshot = [&](BranchId branch) {
      auto v = redistribute_vertices(branch, o.n, 0.5);
      for (double& x : v) x = static_cast<float>(x);
      return VertexGrid(v, v, v);
    };
    b.fixed_vertices = std::array<VertexGrid, 3>{snapshot(BranchId::Bright), snapshot(BranchId::Middle),
                                                 snapshot(BranchId::Dark)};
  }
  static constexpr std::array<std::string_view, 3> kSchemeNames = {"table3", "c100x5", "identity-ones"};
  b.notes = "initialized: " + std::string(kSchemeNames[static_cast<std::size_t>(o.scheme)]);
  for (const auto& w : result.warnings) b.notes += "; " + w;
  b.validate();
  return result;
}

}  // namespace itm
