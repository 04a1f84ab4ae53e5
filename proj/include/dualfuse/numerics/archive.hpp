//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dualfuse/numerics/tensor.hpp"

namespace dualfuse::num {

/// Named-tensor container used for checkpoints.
///
/// Layout (all integers and payloads little-endian):
///   8 bytes  magic "DFUSECKP"
///   u32      format version
///   u64      header length, then that many bytes of UTF-8 JSON
///   u64      tensor count, then per tensor:
///            u32 name length, name bytes, u32 rank, rank x u64 extents,
///            numel x f64 payload
struct TensorArchive {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string header_json;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor &get(const std::string &name) const;
};

void write_archive(const std::filesystem::path &path, const TensorArchive &archive);
TensorArchive read_archive(const std::filesystem::path &path);

}  // namespace dualfuse::num
