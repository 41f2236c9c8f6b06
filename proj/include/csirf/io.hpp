#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "csirf/errors.hpp"

namespace csirf::io {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian and this code writes native byte order");

template <typename T>
inline void write_pod(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
inline T read_pod(std::istream& is, const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw data_error(std::string("truncated file while reading ") + what);
    return v;
}

inline void read_bytes(std::istream& is, void* p, size_t n, const char* what) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n))
        throw data_error(std::string("truncated file while reading ") + what);
}

inline void write_string(std::ostream& os, const std::string& s) {
    if (s.size() > 0xffff) throw data_error("string field too long");
    write_pod<uint16_t>(os, static_cast<uint16_t>(s.size()));
    write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is, const char* what) {
    const auto n = read_pod<uint16_t>(is, what);
    std::string s(n, '\0');
    if (n) read_bytes(is, s.data(), n, what);
    return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const char* format_name) {
    char got[4];
    is.read(got, 4);
    if (is.gcount() != 4)
        throw data_error(std::string(format_name) + ": file too short for magic");
    if (std::memcmp(got, magic, 4) != 0)
        throw data_error(std::string(format_name) + ": bad magic");
}

} // namespace csirf::io
