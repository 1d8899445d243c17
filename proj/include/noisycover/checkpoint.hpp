#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisycover/mlp.hpp"

namespace noisycover {

// NCAP binary layout, all little-endian:
//   "NCAP" | u8 version | u32 count | u32 dims[count] | f64 W_1 row-major ...
inline constexpr char kCheckpointMagic[4] = {'N', 'C', 'A', 'P'};
inline constexpr unsigned char kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<unsigned char> encode_checkpoint(const ParamSet& params);
ParamSet decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace noisycover
