#pragma once

#include <filesystem>

#include "madrom/network/network.hpp"
#include "madrom/persist/container.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/training/config.hpp"
#include "madrom/training/trainer.hpp"

namespace madrom::persist {

enum class Kind : std::uint32_t { kModel = 1, kBank = 2, kInstance = 3, kWeights = 4 };

/// Payload encoders for the individual pieces, shared by every file kind.
void write_network_config(ByteWriter& w, const net::NetworkConfig& c);
net::NetworkConfig read_network_config(ByteReader& r);
void write_instance_spec(ByteWriter& w, const problems::InstanceSpec& s);
problems::InstanceSpec read_instance_spec(ByteReader& r);
void write_bank(ByteWriter& w, const train::LatentBank& bank);
train::LatentBank read_bank(ByteReader& r);

/// Manifest as JSON text (the one human-readable section).
std::string manifest_json(const train::Manifest& m);
train::Manifest parse_manifest_json(const std::string& text);
std::string train_config_json(const train::TrainConfig& c);
/// Strict parse: unknown keys and wrong types throw ConfigError, and so does a
/// config that fails validation. Missing keys keep their defaults.
train::TrainConfig parse_train_config_json(const std::string& text, const std::string& where = "train");

Bytes encode_model(const train::PretrainedModel& model);
train::PretrainedModel decode_model(std::span<const std::uint8_t> bytes);

void save(const train::PretrainedModel& model, const std::filesystem::path& path);
void save(const train::LatentBank& bank, const std::filesystem::path& path);
void save(const problems::InstanceSpec& spec, const std::filesystem::path& path);
void save(const net::NetworkWeights& weights, const std::filesystem::path& path);

train::PretrainedModel load_model(const std::filesystem::path& path);
train::LatentBank load_bank(const std::filesystem::path& path);
problems::InstanceSpec load_instance(const std::filesystem::path& path);
net::NetworkWeights load_weights(const std::filesystem::path& path);

}  // namespace madrom::persist
