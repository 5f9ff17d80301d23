#include "gownet/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "gownet/errors.hpp"

namespace gownet {

Arch arch_from_string(const std::string& s) {
  if (s == "gcn_net") return Arch::gcn_net;
  if (s == "gcn_gpool_net") return Arch::gcn_gpool_net;
  if (s == "hconv_net") return Arch::hconv_net;
  if (s == "hconv_gpool_net") return Arch::hconv_gpool_net;
  throw ConfigError("unknown architecture: " + s);
}

std::string arch_to_string(Arch a) {
  switch (a) {
    case Arch::gcn_net: return "gcn_net";
    case Arch::gcn_gpool_net: return "gcn_gpool_net";
    case Arch::hconv_net: return "hconv_net";
    default: return "hconv_gpool_net";
  }
}

void ModelSpec::validate() const {
  if (channels.size() != 4) throw ConfigError("model: exactly 4 feature layers required");
  if (input_dim == 0) throw ConfigError("model: input_dim not set");
  if (n_classes < 2) throw ConfigError("model: need at least 2 classes");
  if (kernel_width % 2 == 0) throw ConfigError("model: kernel width must be odd");
  if (dropout_keep <= 0.0 || dropout_keep > 1.0)
    throw ConfigError("model: dropout keep rate must be in (0, 1]");
  if (uses_hconv()) {
    for (std::size_t c : channels)
      if (c % 2 != 0) throw ConfigError("model: hConv layer widths must be even");
  }
}

const Matrix& ModelParams::at(const std::string& name) const {
  for (const ParamGroup& g : groups)
    if (g.name == name) return g.value;
  throw ConfigError("no parameter group named " + name);
}

Matrix& ModelParams::at(const std::string& name) {
  for (ParamGroup& g : groups)
    if (g.name == name) return g.value;
  throw ConfigError("no parameter group named " + name);
}

std::size_t ModelParams::total_size() const {
  std::size_t t = 0;
  for (const ParamGroup& g : groups) t += g.value.size();
  return t;
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-s, s);
  return m;
}

// gPool sites sit after layers 2 and 3 (0-based indices 1 and 2).
bool gpool_after(const ModelSpec& spec, std::size_t layer) {
  return spec.uses_gpool() && (layer == 1 || layer == 2);
}

}  // namespace

ModelParams build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  ModelParams params;
  std::size_t c_in = spec.input_dim;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t c_out = spec.channels[l];
    const std::string prefix = "layer" + std::to_string(l + 1);
    if (spec.uses_hconv()) {
      const std::size_t half = c_out / 2;
      params.groups.push_back(
          {prefix + ".conv.K",
           glorot(spec.kernel_width * c_in, half, spec.kernel_width * c_in, half, rng)});
      params.groups.push_back({prefix + ".conv.b", Matrix(1, half)});
      params.groups.push_back({prefix + ".gcn.W", glorot(c_in, half, c_in, half, rng)});
      params.groups.push_back({prefix + ".gcn.b", Matrix(1, half)});
    } else {
      params.groups.push_back({prefix + ".gcn.W", glorot(c_in, c_out, c_in, c_out, rng)});
      params.groups.push_back({prefix + ".gcn.b", Matrix(1, c_out)});
    }
    if (gpool_after(spec, l)) {
      Matrix p(c_out, 1);
      for (std::size_t i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform(-0.1, 0.1);
      params.groups.push_back({"gpool" + std::to_string(l + 1) + ".p", std::move(p)});
    }
    c_in = c_out;
  }
  params.groups.push_back(
      {"dense.W", glorot(spec.readout_dim(), spec.n_classes, spec.readout_dim(), spec.n_classes, rng)});
  params.groups.push_back({"dense.b", Matrix(1, spec.n_classes)});
  return params;
}

ForwardResult forward(const ModelParams& params, const ModelSpec& spec, const TextGraph& graph,
                      bool train, Rng& rng, bool use_gate) {
  spec.validate();
  if (graph.degenerate()) throw DegenerateGraphError("forward: graph has no real nodes");
  if (graph.features.cols() != spec.input_dim)
    throw ShapeError("forward: graph feature dim " + std::to_string(graph.features.cols()) +
                     " != model input_dim " + std::to_string(spec.input_dim));

  // Work on the real subgraph; padding only exists in the stored dataset.
  const std::size_t n = graph.n_real;
  Matrix x0(n, graph.features.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < x0.cols(); ++j) x0(i, j) = graph.features(i, j);
  Adjacency a_cur{Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a_cur.data(i, j) = graph.adjacency.data(i, j);

  ForwardResult res;
  ad::Tape& tape = res.tape;
  for (const ParamGroup& g : params.groups) res.param_ids.push_back(tape.param(g.value));
  auto pid = [&](const std::string& name) {
    for (std::size_t i = 0; i < params.groups.size(); ++i)
      if (params.groups[i].name == name) return res.param_ids[i];
    throw ConfigError("no parameter group named " + name);
  };

  NormalizedAdjacency a_norm = normalize_graph(a_cur);
  ad::TensorId x = tape.constant(std::move(x0));
  std::vector<ad::TensorId> readout_parts;

  for (std::size_t l = 0; l < 4; ++l) {
    const std::string prefix = "layer" + std::to_string(l + 1);
    if (spec.uses_hconv()) {
      layers::HConvParamIds hp;
      hp.kernel = pid(prefix + ".conv.K");
      hp.conv_bias = pid(prefix + ".conv.b");
      hp.gcn = {pid(prefix + ".gcn.W"), pid(prefix + ".gcn.b")};
      hp.width = spec.kernel_width;
      x = layers::hconv_forward(tape, a_norm, x, hp);
    } else {
      x = layers::gcn_forward(tape, a_norm, x, {pid(prefix + ".gcn.W"), pid(prefix + ".gcn.b")});
    }

    if (l >= 1) {
      const std::vector<bool> mask(tape.value(x).rows(), true);
      readout_parts.push_back(tape.masked_global_max_pool(x, mask));
    }

    if (gpool_after(spec, l)) {
      const std::size_t rows = tape.value(x).rows();
      const int k = std::max<int>(1, static_cast<int>((rows + 1) / 2));
      const std::vector<bool> mask(rows, true);
      layers::GPoolResult pooled = layers::gpool_forward(
          tape, a_cur, x, pid("gpool" + std::to_string(l + 1) + ".p"), k, mask, use_gate);
      x = pooled.x;
      a_cur = pooled.adj;
      a_norm = spec.renormalize_after_pool
                   ? normalize_graph(a_cur)
                   : extract_subgraph(a_norm, pooled.idx);
    }
  }

  ad::TensorId readout = readout_parts[0];
  for (std::size_t i = 1; i < readout_parts.size(); ++i)
    readout = tape.concat_cols(readout, readout_parts[i]);
  readout = tape.dropout(readout, spec.dropout_keep, rng, train);
  res.logits = tape.add_row_vector(tape.matmul(readout, pid("dense.W")), pid("dense.b"));
  return res;
}

int predict(const ModelParams& params, const ModelSpec& spec, const TextGraph& graph) {
  Rng rng(0);  // unused at eval
  ForwardResult res = forward(params, spec, graph, /*train=*/false, rng);
  const Matrix& logits = res.tape.value(res.logits);
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.cols(); ++j)
    if (logits(0, j) > logits(0, best)) best = j;
  return static_cast<int>(best);
}

ParamCounts param_count(const ModelParams& params) {
  ParamCounts out;
  for (const ParamGroup& g : params.groups) {
    out.groups.push_back({g.name, g.value.size()});
    out.total += g.value.size();
    if (g.name.rfind("gpool", 0) == 0) out.gpool_overhead += g.value.size();
  }
  return out;
}

// --- checkpoint serialization ---

namespace {

constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    unsigned v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    if (i + 2 < bytes.size()) v |= bytes[i + 2];
    out.push_back(kB64Chars[(v >> 18) & 63]);
    out.push_back(kB64Chars[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kB64Chars[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? kB64Chars[v & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> b64_decode(const std::string& s) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  int acc = 0, bits = 0;
  for (char c : s) {
    if (c == '=') break;
    const int v = val(c);
    if (v < 0) throw FormatError("checkpoint: invalid base64");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

// float32 row-major little-endian blob
std::string encode_matrix(const Matrix& m) {
  std::vector<unsigned char> bytes(m.size() * 4);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const float f = static_cast<float>(m.data()[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    bytes[4 * i + 0] = static_cast<unsigned char>(u & 0xFF);
    bytes[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xFF);
    bytes[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xFF);
    bytes[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xFF);
  }
  return b64_encode(bytes);
}

Matrix decode_matrix(const std::string& b64, std::size_t rows, std::size_t cols) {
  const std::vector<unsigned char> bytes = b64_decode(b64);
  if (bytes.size() != rows * cols * 4) throw FormatError("checkpoint: blob size mismatch");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    m.data()[i] = static_cast<double>(f);
  }
  return m;
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return {{"arch", arch_to_string(spec.arch)},
          {"channels", spec.channels},
          {"kernel_width", spec.kernel_width},
          {"n_classes", spec.n_classes},
          {"input_dim", spec.input_dim},
          {"dropout_keep", spec.dropout_keep},
          {"renormalize_after_pool", spec.renormalize_after_pool}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.arch = arch_from_string(j.at("arch").get<std::string>());
  spec.channels = j.at("channels").get<std::vector<std::size_t>>();
  spec.kernel_width = j.at("kernel_width").get<std::size_t>();
  spec.n_classes = j.at("n_classes").get<std::size_t>();
  spec.input_dim = j.at("input_dim").get<std::size_t>();
  spec.dropout_keep = j.at("dropout_keep").get<double>();
  spec.renormalize_after_pool = j.at("renormalize_after_pool").get<bool>();
  return spec;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json j;
  j["version"] = 1;
  j["spec"] = spec_to_json(ckpt.spec);
  j["seed"] = ckpt.seed;
  j["step"] = ckpt.step;
  auto& pj = j["params"] = nlohmann::json::array();
  for (const ParamGroup& g : ckpt.params.groups) {
    pj.push_back({{"name", g.name},
                  {"rows", g.value.rows()},
                  {"cols", g.value.cols()},
                  {"data", encode_matrix(g.value)}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (j.at("version").get<int>() != 1) throw FormatError("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.spec = spec_from_json(j.at("spec"));
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.step = j.at("step").get<std::uint64_t>();
  for (const auto& gj : j.at("params")) {
    ckpt.params.groups.push_back(
        {gj.at("name").get<std::string>(),
         decode_matrix(gj.at("data").get<std::string>(), gj.at("rows").get<std::size_t>(),
                       gj.at("cols").get<std::size_t>())});
  }
  return ckpt;
}

}  // namespace gownet
