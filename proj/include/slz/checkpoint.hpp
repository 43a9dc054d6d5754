#pragma once

#include <filesystem>
#include <iosfwd>

#include "slz/unet.hpp"

namespace slz {

// Checkpoint layout (all integers little-endian):
//   "SLZK" | u32 version | u32 depth | u32 base_channels | u32 in_channels
//   | u32 num_classes | u64 seed | u32 tensor_count
//   then per tensor: u32 name_len | name bytes | u32 rank | u32 dims[rank]
//   | f32 values[product(dims)]
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const UNetParams<float>& params);
UNetParams<float> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const UNetParams<float>& params);
UNetParams<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace slz
