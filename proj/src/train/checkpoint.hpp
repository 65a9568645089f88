// Copyright 2026 The PointMask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POINTMASK_TRAIN_CHECKPOINT_HPP_
#define POINTMASK_TRAIN_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "train/train.hpp"

// PMCK checkpoint container, little-endian:
//
//   "PMCK" | u32 version | u32 block_count | blocks...
//
// Each block is a u32-length-prefixed name and a u8 kind. Kind 0 holds a
// tensor: u32 rank, rank u32 extents, then the values as f64. Kind 1 holds
// u32-length-prefixed UTF-8 text. Parameters live in "param/<name>" blocks,
// Adam moments in "adam.m/<name>" and "adam.v/<name>". The blocks "config",
// "meta" (JSON) and "rng" (engine state) carry everything else.
namespace pointmask::train {

inline constexpr char kCheckpointMagic[4] = {'P', 'M', 'C', 'K'};

std::vector<std::uint8_t> checkpoint_encode(const Checkpoint& checkpoint);
/// Throws FormatError on anything that does not describe a complete model.
Checkpoint checkpoint_decode(std::vector<std::uint8_t> bytes);

void checkpoint_save(const Checkpoint& checkpoint, const std::string& path);
Checkpoint checkpoint_load(const std::string& path);

}  // namespace pointmask::train

#endif  // POINTMASK_TRAIN_CHECKPOINT_HPP_
