// SPDX-License-Identifier: Apache-2.0
//
// chansound - wideband channel sounding post-processing and statistics
// Copyright (C) 2026 The chansound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
// Snapshot file format: one burst per (snapshot, receiver).
//
// Layout, little-endian:
//   "CSNP" | u32 version | u64 m | u64 j | f64 timestamp | u64 N_f | f64 spacing
//   | u64 repetitions | u64 checksum | payload
// The payload holds N_f * repetitions complex float64 values (re, im
// interleaved), frequency-major: value (k, r) sits at index k * repetitions + r.
// The checksum is FNV-1a 64 over the header fields before it and the payload.

#pragma once

#include "chansound/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chansound
{

inline constexpr std::uint32_t snapshot_format_version = 1;
inline constexpr std::size_t snapshot_header_bytes = 64;

struct SnapshotHeader
{
    std::uint32_t version = snapshot_format_version;
    std::uint64_t snapshot = 0;
    std::uint64_t receiver = 0;
    double timestamp = 0.0;
    std::uint64_t n_subcarriers = 0;
    double subcarrier_spacing = 0.0;
    std::uint64_t repetitions = 0;
};

struct SnapshotFile
{
    SnapshotHeader header;
    std::vector<cplx> payload; // frequency-major

    // Throws DataError when payload length != N_f * repetitions.
    void validate() const;
};

std::string encode_snapshot(const SnapshotFile &file);

// Throws DataError on bad magic, unknown version, truncation or checksum mismatch.
SnapshotFile decode_snapshot(std::string_view bytes);

void write_snapshot_file(const std::filesystem::path &path, const SnapshotFile &file);
SnapshotFile read_snapshot_file(const std::filesystem::path &path);

std::string snapshot_file_name(std::size_t snapshot, std::size_t receiver);

} // namespace chansound
