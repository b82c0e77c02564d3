#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "criss/error.hpp"
#include "criss/matrix.hpp"

namespace criss {

// Embedding file format (bit-exact, little-endian regardless of host):
//   magic "CREM" | u32 version=1 | u32 dim | u64 row count | f32 payload
// Sidecar "<path>.ids" holds one external id per line, one per row.
inline constexpr char kCremMagic[4] = {'C', 'R', 'E', 'M'};
inline constexpr std::uint32_t kCremVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace detail

inline void write_matrix(const EmbeddingMatrix& m, const std::string& path) {
    std::string header;
    header.append(kCremMagic, 4);
    detail::put_u32(header, kCremVersion);
    detail::put_u32(header, m.dim());
    detail::put_u64(header, m.rows());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::string payload;
    payload.reserve(m.values().size() * 4);
    for (float f : m.values()) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
        detail::put_u32(payload, bits);
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw io_error("write failure: " + path);
    out.close();

    std::ofstream ids_out(path + ".ids", std::ios::binary | std::ios::trunc);
    if (!ids_out) throw io_error("cannot open for writing: " + path + ".ids");
    if (m.ids().empty()) {
        for (std::size_t i = 0; i < m.rows(); ++i)
            ids_out << i << '\n';
    } else {
        for (const auto& id : m.ids()) ids_out << id << '\n';
    }
    if (!ids_out) throw io_error("write failure: " + path + ".ids");
}

// `lang` is recorded on the loaded matrix; defaults to the file stem owner's
// choice (callers pass the language they expect the file to hold).
inline EmbeddingMatrix read_matrix(const std::string& path, std::string lang = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open embedding file: " + path);

    unsigned char header[20];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() != sizeof(header))
        throw format_error(path + ": truncated header");
    if (std::memcmp(header, kCremMagic, 4) != 0)
        throw format_error(path + ": bad magic (not a CREM embedding file)");
    const std::uint32_t version = detail::get_u32(header + 4);
    if (version != kCremVersion)
        throw format_error(path + ": unsupported version " + std::to_string(version));
    const std::uint32_t dim = detail::get_u32(header + 8);
    if (dim == 0) throw format_error(path + ": header dim is 0");
    const std::uint64_t count = detail::get_u64(header + 12);

    in.seekg(0, std::ios::end);
    const std::uint64_t file_bytes = static_cast<std::uint64_t>(in.tellg());
    const std::uint64_t payload_bytes = count * dim * 4ull;
    if (file_bytes < sizeof(header) + payload_bytes)
        throw format_error(path + ": truncated payload (expected " +
                           std::to_string(payload_bytes) + " payload bytes, file has " +
                           std::to_string(file_bytes - sizeof(header)) + ")");
    if (file_bytes > sizeof(header) + payload_bytes)
        throw format_error(path + ": trailing bytes after payload");
    in.seekg(sizeof(header), std::ios::beg);

    std::vector<unsigned char> payload(payload_bytes);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload_bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != payload_bytes)
        throw io_error(path + ": read failure");

    std::vector<float> values(count * dim);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = std::bit_cast<float>(detail::get_u32(payload.data() + i * 4));

    std::vector<std::string> ids;
    std::ifstream ids_in(path + ".ids", std::ios::binary);
    if (ids_in) {
        std::string line;
        while (std::getline(ids_in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ids.push_back(line);
        }
        if (ids.size() != count)
            throw format_error(path + ".ids: sidecar has " +
                               std::to_string(ids.size()) + " ids, header says " +
                               std::to_string(count) + " rows");
    } else {
        warn(path + ".ids missing; using row ordinals as external ids");
        ids.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) ids.push_back(std::to_string(i));
    }

    EmbeddingMatrix m(dim, std::move(values), std::move(lang), std::move(ids));
    m.validate();
    return m;
}

}  // namespace criss
