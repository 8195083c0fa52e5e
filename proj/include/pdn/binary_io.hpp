#pragma once

// Little-endian byte encoding shared by the .pdnd and .pdnw formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdn/errors.hpp"

namespace pdn::io {

class ByteWriter {
public:
    void put_bytes(std::string_view raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }

    void put_u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }

    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

    void put_f64s(std::span<const double> values) {
        for (double v : values) put_f64(v);
    }

    const std::vector<char>& bytes() const noexcept { return bytes_; }

private:
    std::vector<char> bytes_;
};

/// Bounds-checked cursor; every short read raises FormatError with the offset.
class ByteReader {
public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    std::uint64_t offset() const noexcept { return pos_; }
    std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }

    void expect_magic(std::string_view magic) {
        need(magic.size(), "magic");
        if (std::string_view(bytes_.data() + pos_, magic.size()) != magic) {
            throw FormatError("bad magic: expected \"" + std::string(magic) + "\"", pos_);
        }
        pos_ += magic.size();
    }

    std::uint8_t get_u8(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint32_t get_u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::uint64_t get_u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    double get_f64(const char* what) { return std::bit_cast<double>(get_u64(what)); }

    void get_f64s(std::span<double> out, const char* what) {
        need(8 * out.size(), what);
        for (double& v : out) v = get_f64(what);
    }

    void expect_end() const {
        if (pos_ != bytes_.size()) throw FormatError("trailing bytes after payload", pos_);
    }

private:
    void need(std::uint64_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(std::string("truncated file while reading ") + what, pos_);
        }
    }

    std::vector<char> bytes_;
    std::uint64_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const char> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

/// FNV-1a 64-bit digest, used for dataset fingerprints.
std::uint64_t fnv1a(std::span<const char> bytes) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace pdn::io
