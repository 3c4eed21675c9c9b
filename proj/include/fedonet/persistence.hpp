#pragma once

#include "fedonet/dataset.hpp"
#include "fedonet/model.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace fedonet {

struct PersistError : std::runtime_error {
    enum class Kind { Io, Magic, Version, Checksum, Shape };
    Kind kind;
    PersistError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// Single-file little-endian containers, written atomically (temp + rename),
// CRC32 over the payload. Byte layouts are documented in docs/FORMATS.md.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

struct Checkpoint {
    ModelConfig config;
    BenchmarkId benchmark = BenchmarkId::Poisson2d;
    MlpParams branch;
    MlpParams trunk;
    std::optional<FreqMatrix> freq;
    AdamState branch_adam;
    AdamState trunk_adam;
    std::int64_t train_step = 0;
    std::uint64_t model_seed = 0;
    std::uint64_t train_seed = 0;

    DeepOnetModel to_model() const { return DeepOnetModel{config, branch, trunk, freq}; }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fedonet
