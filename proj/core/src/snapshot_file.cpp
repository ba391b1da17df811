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

#include "chansound/snapshot_file.hpp"

#include "binary_io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

namespace chansound
{

namespace
{

constexpr char magic[4] = {'C', 'S', 'N', 'P'};
constexpr std::size_t checksum_offset = snapshot_header_bytes - 8;

} // namespace

void SnapshotFile::validate() const
{
    if (payload.size() != header.n_subcarriers * header.repetitions)
        throw DataError("snapshot payload holds " + std::to_string(payload.size()) + " values, expected " +
                        std::to_string(header.n_subcarriers) + " x " + std::to_string(header.repetitions));
}

std::string encode_snapshot(const SnapshotFile &file)
{
    file.validate();
    using detail::append_le;
    std::string buf;
    buf.reserve(snapshot_header_bytes + 16 * file.payload.size());
    buf.append(magic, 4);
    append_le(buf, file.header.version);
    append_le(buf, file.header.snapshot);
    append_le(buf, file.header.receiver);
    append_le(buf, file.header.timestamp);
    append_le(buf, file.header.n_subcarriers);
    append_le(buf, file.header.subcarrier_spacing);
    append_le(buf, file.header.repetitions);

    std::string payload;
    payload.reserve(16 * file.payload.size());
    for (const auto &v : file.payload)
    {
        append_le(payload, v.real());
        append_le(payload, v.imag());
    }
    std::uint64_t h = detail::fnv1a64(buf.data(), buf.size());
    h = detail::fnv1a64(payload.data(), payload.size(), h);
    append_le(buf, h);
    buf += payload;
    return buf;
}

SnapshotFile decode_snapshot(std::string_view bytes)
{
    using detail::read_le;
    if (bytes.size() < snapshot_header_bytes)
        throw DataError("truncated snapshot header");
    if (bytes.substr(0, 4) != std::string_view(magic, 4))
        throw DataError("bad snapshot magic");

    SnapshotFile file;
    const char *p = bytes.data();
    auto &h = file.header;
    h.version = read_le<std::uint32_t>(p + 4);
    if (h.version != snapshot_format_version)
        throw DataError("unsupported snapshot version " + std::to_string(h.version));
    h.snapshot = read_le<std::uint64_t>(p + 8);
    h.receiver = read_le<std::uint64_t>(p + 16);
    h.timestamp = read_le<double>(p + 24);
    h.n_subcarriers = read_le<std::uint64_t>(p + 32);
    h.subcarrier_spacing = read_le<double>(p + 40);
    h.repetitions = read_le<std::uint64_t>(p + 48);
    const auto stored = read_le<std::uint64_t>(p + checksum_offset);

    // guard the multiplication against garbage headers
    if (h.n_subcarriers == 0 || h.repetitions == 0 || h.n_subcarriers > (1ULL << 32) || h.repetitions > (1ULL << 20))
        throw DataError("implausible snapshot dimensions");
    const std::size_t n_values = h.n_subcarriers * h.repetitions;
    if (bytes.size() != snapshot_header_bytes + 16 * n_values)
        throw DataError("snapshot payload length does not match its header");

    std::uint64_t sum = detail::fnv1a64(p, checksum_offset);
    sum = detail::fnv1a64(p + snapshot_header_bytes, 16 * n_values, sum);
    if (sum != stored)
        throw DataError("snapshot checksum mismatch");

    file.payload.resize(n_values);
    const char *q = p + snapshot_header_bytes;
    for (std::size_t i = 0; i < n_values; ++i)
        file.payload[i] = cplx{read_le<double>(q + 16 * i), read_le<double>(q + 16 * i + 8)};
    return file;
}

void write_snapshot_file(const std::filesystem::path &path, const SnapshotFile &file)
{
    const auto bytes = encode_snapshot(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ConfigError("write failed: " + path.string());
}

SnapshotFile read_snapshot_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

std::string snapshot_file_name(std::size_t snapshot, std::size_t receiver)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "snap_%06zu_rx%02zu.csnp", snapshot, receiver);
    return buf;
}

} // namespace chansound
