#pragma once

// Little-endian binary IO used by the model/image file formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vmc/common.hpp"

namespace vmc {

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
    write_u32(os, static_cast<uint32_t>(v & 0xFFFFFFFFULL));
    write_u32(os, static_cast<uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& os, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    write_u32(os, v);
}

inline uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw TruncatedFile(std::string("truncated while reading ") + what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline uint64_t read_u64(std::istream& is, const char* what) {
    uint64_t lo = read_u32(is, what);
    uint64_t hi = read_u32(is, what);
    return lo | (hi << 32);
}

inline float read_f32(std::istream& is, const char* what) {
    uint32_t v = read_u32(is, what);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

inline void write_magic(std::ostream& os, const char* magic7) {
    os.write(magic7, 7);
}

inline void expect_magic(std::istream& is, const char* magic7) {
    char got[7];
    is.read(got, 7);
    if (!is || std::memcmp(got, magic7, 7) != 0)
        throw BadMagic(std::string("expected magic ") + magic7);
}

} // namespace vmc
