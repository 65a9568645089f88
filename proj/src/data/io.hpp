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

#ifndef POINTMASK_DATA_IO_HPP_
#define POINTMASK_DATA_IO_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "data/point_cloud.hpp"

// PMDS dataset container, little-endian:
//
//   "PMDS" | u32 version | u32 num_samples | u32 num_points | u32 dims=3 |
//   u32 num_classes | samples...
//
// Version 1 stores each sample as u32 label followed by num_points * 3 f32
// coordinates. Version 2 handles clouds of differing size: every sample is
// prefixed by its own u32 point count and the header num_points is 0.
namespace pointmask::data {

inline constexpr char kDatasetMagic[4] = {'P', 'M', 'D', 'S'};

std::vector<std::uint8_t> dataset_encode(const Dataset& dataset);
/// Throws FormatError on a bad magic, unknown version, or a payload that does
/// not match the header.
Dataset dataset_decode(std::vector<std::uint8_t> bytes);

void dataset_save(const Dataset& dataset, const std::string& path);
Dataset dataset_load(const std::string& path);

/// Class names used when a file does not carry them.
std::vector<std::string> default_class_names(std::size_t num_classes);

/// One "x y z" line per point; '#' starts a comment.
PointCloud xyz_parse(std::string_view text);
std::string xyz_serialize(const PointCloud& cloud);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_IO_HPP_
