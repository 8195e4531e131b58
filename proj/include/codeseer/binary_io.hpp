#ifndef CODESEER_BINARY_IO_HPP
#define CODESEER_BINARY_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include <openssl/sha.h>

#include "codeseer/error.hpp"

namespace codeseer {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::string_view bytes) {
    Digest d{};
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), d.data());
    return d;
}

inline std::string to_hex(const Digest& d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(d.size() * 2);
    for (const auto b : d) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xF]);
    }
    return s;
}

/// Append-only little-endian byte buffer.
class ByteWriter {
public:
    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        buf_.append(raw, sizeof(T));
    }

    void put_bytes(std::string_view bytes) { buf_.append(bytes); }

    template <class T>
        requires std::is_arithmetic_v<T>
    void put_span(std::span<const T> values) {
        buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
    }

    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }

    const std::string& bytes() const noexcept { return buf_; }
    std::string take() noexcept { return std::move(buf_); }

private:
    std::string buf_;
};

/// Bounds-checked little-endian reader; every overrun is a FormatError.
class ByteReader {
public:
    ByteReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    template <class T>
        requires std::is_arithmetic_v<T>
    T get() {
        require(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string_view get_bytes(std::size_t n) {
        require(n);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    void get_span(std::span<T> out) {
        require(out.size_bytes());
        std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
        pos_ += out.size_bytes();
    }

    std::string get_string() {
        const auto n = get<std::uint32_t>();
        return std::string(get_bytes(n));
    }

    void expect_magic(std::string_view magic) {
        if (bytes_.size() - pos_ < magic.size() || bytes_.substr(pos_, magic.size()) != magic) {
            throw FormatError(what_ + ": bad magic (expected '" + std::string(magic) + "')");
        }
        pos_ += magic.size();
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    bool at_end() const noexcept { return pos_ == bytes_.size(); }
    const std::string& what() const noexcept { return what_; }

private:
    void require(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError(what_ + ": truncated");
    }

    std::string_view bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to '" + path.string() + "'");
}

}  // namespace codeseer

#endif  // CODESEER_BINARY_IO_HPP
