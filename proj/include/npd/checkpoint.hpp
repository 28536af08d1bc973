// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "npd/model.hpp"

namespace npd {

// Binary layout, little-endian:
//   "NPDCKPT1", u64 dim, u64 n, u64 N, f64 time, f64 D, f64 z_1..z_N,
//   then N + 1 arrays of n^dim f64 (c_1..c_N, rho_tilde), x1 fastest.
struct Checkpoint {
  NpdState state;
  SpeciesParams params;
  BodyCharge body;
};

void checkpoint_save(const std::filesystem::path& path, const NpdState& state, const SpeciesParams& params,
                     const BodyCharge& body);

// Throws CheckpointError on a bad magic, an unsupported grid or a size mismatch.
Checkpoint checkpoint_load(const std::filesystem::path& path);

}  // namespace npd
