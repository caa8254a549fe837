#pragma once

// Little-endian stream helpers shared by the binary file formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace leslab::detail {

template <class T>
void write_le(std::ostream& os, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    os.write(bytes.data(), sizeof(T));
}

template <class T>
T read_le(std::istream& is)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    if (!is.read(bytes.data(), sizeof(T)))
        throw std::runtime_error("unexpected end of file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void write_magic(std::ostream& os, std::string_view magic)
{
    os.write(magic.data(), std::streamsize(magic.size()));
}

inline void expect_magic(std::istream& is, std::string_view magic, const std::string& what)
{
    std::string got(magic.size(), '\0');
    if (!is.read(got.data(), std::streamsize(got.size())) || got != magic)
        throw std::runtime_error(what + ": bad magic (expected " + std::string(magic) + ")");
}

inline void expect_eof(std::istream& is, const std::string& what)
{
    if (is.peek() != std::char_traits<char>::eof())
        throw std::runtime_error(what + ": trailing bytes after payload");
}

}  // namespace leslab::detail
