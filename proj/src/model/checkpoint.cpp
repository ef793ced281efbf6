// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dgkd/core/error.hpp"

namespace dgkd::model {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'G', 'K', 'D', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <class U>
void write_pod(std::ostream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <class U>
U read_pod(std::istream& in, const std::filesystem::path& path) {
  U value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(U));
  if (!in) throw FormatError(path.string() + ": truncated checkpoint");
  return value;
}

}  // namespace

json to_json(const EncoderConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"num_layers", c.num_layers}, {"hidden_dim", c.hidden_dim},
          {"num_heads", c.num_heads},   {"ffn_dim", c.ffn_dim},       {"max_len", c.max_len},
          {"dropout", c.dropout},
          {"init_std", c.init_std}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.num_layers = j.value("num_layers", c.num_layers);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_len = j.value("max_len", c.max_len);
  c.dropout = j.value("dropout", c.dropout);
  c.init_std = j.value("init_std", c.init_std);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json tensors = json::array();
  for (const auto& e : ckpt.model.params) {
    tensors.push_back({{"name", e.name}, {"group", e.group}, {"rows", e.value.rows()}, {"cols", e.value.cols()}});
  }
  const json header = {{"format", "dgkd-checkpoint"},
                       {"version", kCheckpointVersion},
                       {"config", to_json(ckpt.model.config)},
                       {"meta",
                        {{"method", ckpt.meta.method},
                         {"epoch", ckpt.meta.epoch},
                         {"seed", ckpt.meta.seed},
                         {"combo_id", ckpt.meta.combo_id},
                         {"tokenizer_id", ckpt.meta.tokenizer_id},
                         {"extra", ckpt.meta.extra}}},
                       {"tensors", tensors}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& e : ckpt.model.params) {
    out.write(reinterpret_cast<const char*>(e.value.values().data()),
              static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
  if (!out) throw Error("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open checkpoint " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError(path.string() + ": not a checkpoint");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) throw FormatError(path.string() + ": unsupported checkpoint version");
  const auto header_len = read_pod<std::uint64_t>(in, path);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw FormatError(path.string() + ": truncated checkpoint header");
  json header;
  try {
    header = json::parse(text);
  } catch (const json::parse_error&) {
    throw FormatError(path.string() + ": malformed checkpoint header");
  }
  Checkpoint ckpt;
  ckpt.model.config = encoder_config_from_json(header.at("config"));
  const auto& m = header.at("meta");
  ckpt.meta.method = m.at("method").get<std::string>();
  ckpt.meta.epoch = m.at("epoch").get<std::size_t>();
  ckpt.meta.seed = m.at("seed").get<std::uint64_t>();
  ckpt.meta.combo_id = m.at("combo_id").get<std::string>();
  ckpt.meta.tokenizer_id = m.at("tokenizer_id").get<std::string>();
  ckpt.meta.extra = m.value("extra", json::object());
  for (const auto& t : header.at("tensors")) {
    Matrix<double> value(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
    in.read(reinterpret_cast<char*>(value.values().data()), static_cast<std::streamsize>(value.size() * sizeof(double)));
    if (!in) throw FormatError(path.string() + ": truncated tensor data");
    ckpt.model.params.add(t.at("name").get<std::string>(), t.at("group").get<std::string>(), std::move(value));
  }
  EncoderLayout::of(ckpt.model.params, ckpt.model.config);
  return ckpt;
}

}  // namespace dgkd::model
