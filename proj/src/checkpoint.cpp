#include "fae/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "fae/errors.hpp"
#include "fae/rng.hpp"
#include "json.hpp"

namespace fae {
namespace {

constexpr std::array<char, 8> kMagic = {'F', 'A', 'E', 'C', 'K', 'P', 'T', '\0'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw ParseError("checkpoint: truncated header");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

void put_f64s(std::ostream& out, const double* data, Index count) {
  std::array<char, 8> bytes{};
  for (Index i = 0; i < count; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    out.write(bytes.data(), 8);
  }
}

void get_f64s(std::istream& in, double* data, Index count) {
  std::array<unsigned char, 8> bytes{};
  for (Index i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) throw ParseError("checkpoint: truncated payload");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[static_cast<std::size_t>(b)]} << (8 * b);
    data[i] = std::bit_cast<double>(bits);
  }
}

nlohmann::json hyperparams_json(const Hyperparams& hp) {
  return {{"k", hp.k},
          {"d", hp.latent_dim()},
          {"lambda1", hp.lambda1},
          {"lambda2", hp.lambda2},
          {"lr", hp.lr},
          {"epochs", hp.epochs},
          {"batch", hp.batch},
          {"seed", hp.seed},
          {"l1_mode", std::string(to_string(hp.l1_mode))},
          {"loss_scale", std::string(to_string(hp.loss_scale))},
          {"restore_best", hp.restore_best}};
}

Hyperparams hyperparams_from(const nlohmann::json& j) {
  Hyperparams hp;
  hp.k = j.at("k").get<Index>();
  hp.d = j.at("d").get<Index>();
  hp.lambda1 = j.at("lambda1").get<double>();
  hp.lambda2 = j.at("lambda2").get<double>();
  hp.lr = j.at("lr").get<double>();
  hp.epochs = j.at("epochs").get<int>();
  hp.batch = j.at("batch").get<Index>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  hp.l1_mode = parse_l1_mode(j.at("l1_mode").get<std::string>());
  hp.loss_scale = parse_loss_scale(j.at("loss_scale").get<std::string>());
  hp.restore_best = j.at("restore_best").get<bool>();
  return hp;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const Index m = ckpt.params.w.size();
  const Index d = ckpt.params.ed.latent_dim();
  if (ckpt.params.ed.enc.rows() != m || ckpt.params.ed.dec.rows() != d || ckpt.params.ed.dec.cols() != m) {
    throw ContractError("write_checkpoint: inconsistent parameter shapes");
  }
  nlohmann::json header = {{"method", ckpt.method},
                           {"m", m},
                           {"d", d},
                           {"k", ckpt.hp.k},
                           {"epoch", ckpt.epoch},
                           {"hyperparams", hyperparams_json(ckpt.hp)},
                           {"rng", {{"algorithm", ckpt.rng_algorithm}, {"seed", ckpt.hp.seed}}},
                           {"threads", ckpt.threads}};
  if (ckpt.hierarchy) {
    header["hierarchy"] = {{"h", ckpt.hierarchy->h},
                           {"k", ckpt.hierarchy->k},
                           {"lambda0", ckpt.hierarchy->lambda0},
                           {"lambdas", ckpt.hierarchy->lambdas}};
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write checkpoint '" + path + "'");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_f64s(out, ckpt.params.w.data(), m);
  put_f64s(out, ckpt.params.ed.enc.data(), m * d);
  put_f64s(out, ckpt.params.ed.dec.data(), d * m);
  if (!out) throw ParseError("write failed for checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("'" + path + "' is not a checkpoint (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t len = get_u32(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw ParseError("checkpoint: truncated header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.method = header.at("method").get<std::string>();
    ckpt.hp = hyperparams_from(header.at("hyperparams"));
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.rng_algorithm = header.at("rng").at("algorithm").get<std::string>();
    ckpt.threads = header.at("threads").get<int>();
    if (header.contains("hierarchy")) {
      const auto& h = header["hierarchy"];
      HierarchyParams hier;
      hier.h = h.at("h").get<Index>();
      hier.k = h.at("k").get<Index>();
      hier.lambda0 = h.at("lambda0").get<double>();
      hier.lambdas = h.at("lambdas").get<std::vector<double>>();
      ckpt.hierarchy = hier;
    }
    const auto m = header.at("m").get<Index>();
    const auto d = header.at("d").get<Index>();
    if (m < 1 || d < 1) throw ParseError("checkpoint: invalid dimensions");
    ckpt.params.w.resize(m);
    ckpt.params.ed.enc.resize(m, d);
    ckpt.params.ed.dec.resize(d, m);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  get_f64s(in, ckpt.params.w.data(), ckpt.params.w.size());
  get_f64s(in, ckpt.params.ed.enc.data(), ckpt.params.ed.enc.size());
  get_f64s(in, ckpt.params.ed.dec.data(), ckpt.params.ed.dec.size());
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint: trailing bytes");
  return ckpt;
}

Checkpoint make_checkpoint(const std::string& method, const ModelParams& params,
                           const TrainReport& report, const std::optional<HierarchyParams>& hierarchy) {
  Checkpoint c;
  c.method = method;
  c.hp = report.hp;
  c.hierarchy = hierarchy;
  c.params = params;
  c.rng_algorithm = report.rng_algorithm.empty() ? std::string(SeededRng::kAlgorithm) : report.rng_algorithm;
  c.threads = report.threads;
  c.epoch = report.best_epoch >= 0 && report.hp.restore_best
                ? report.epochs[static_cast<std::size_t>(report.best_epoch)].epoch
                : static_cast<int>(report.epochs.size());
  return c;
}

std::vector<SelectionResult> checkpoint_selections(const Checkpoint& ckpt) {
  if (ckpt.method == "hfae") {
    if (!ckpt.hierarchy) throw ParseError("hfae checkpoint without hierarchy parameters");
    return hierarchical_masks(ckpt.params.w, *ckpt.hierarchy).groups;
  }
  if (ckpt.method == "ae") return {encoder_norm_ranking(ckpt.params.ed, ckpt.hp.k)};
  if (ckpt.method == "fae" || ckpt.method == "iae") return {topk_mask(ckpt.params.w, ckpt.hp.k)};
  throw ParseError("unknown checkpoint method '" + ckpt.method + "'");
}

}  // namespace fae
