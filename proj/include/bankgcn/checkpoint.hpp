#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bankgcn/model.hpp"

namespace bankgcn {

// Container layout, little-endian throughout:
//   "BGCN" | u32 version | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank], f64 data (row-major)

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

std::string encode_tensors(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_tensors(const std::string& bytes);

std::string encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(const std::string& bytes);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace bankgcn
