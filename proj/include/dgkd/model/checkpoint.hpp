// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "dgkd/model/encoder.hpp"

namespace dgkd::model {

struct CheckpointMeta {
  std::string method;
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::string combo_id;
  std::string tokenizer_id;
  /// Free-form extras (hyperparameters, dev scores).
  nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
  CheckpointMeta meta;
  SpanModel model;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary container: 8-byte magic "DGKDCKPT", u32 version, u64 header
/// length, JSON header (config, metadata, tensor directory), then each
/// tensor as little-endian float64 in directory order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

}  // namespace dgkd::model
