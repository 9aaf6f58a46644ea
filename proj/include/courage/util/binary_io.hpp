#pragma once

// Little-endian binary encoding helpers for checkpoints and caches.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "courage/error.hpp"
#include "courage/numerics/matrix.hpp"

namespace courage::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& os) : os_(os) {}

    void magic(const char (&tag)[9]) { os_.write(tag, 8); }

    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    void f64s(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }

    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        raw(m.values().data(), m.size() * sizeof(double));
    }

private:
    void raw(const void* p, std::size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!os_) throw std::runtime_error("binary write failed");
    }

    std::ostream& os_;
};

class BinaryReader {
public:
    BinaryReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

    void expect_magic(const char (&tag)[9]) {
        char buf[8];
        raw(buf, 8);
        if (std::memcmp(buf, tag, 8) != 0) {
            throw FormatError(source_ + ": bad magic, expected " + std::string(tag, 8));
        }
    }

    std::uint8_t u8() { return read<std::uint8_t>(); }
    std::uint32_t u32() { return read<std::uint32_t>(); }
    std::uint64_t u64() { return read<std::uint64_t>(); }
    std::int64_t i64() { return read<std::int64_t>(); }
    double f64() { return read<double>(); }

    std::string str() {
        const auto n = u32();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

    std::vector<double> f64s() {
        const auto n = u64();
        guard_size(n);
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }

    Matrix matrix() {
        const auto r = u64();
        const auto c = u64();
        guard_size(r * c);
        std::vector<double> data(r * c);
        raw(data.data(), data.size() * sizeof(double));
        return Matrix(r, c, std::move(data));
    }

    const std::string& source() const { return source_; }

private:
    template <class T>
    T read() {
        T v{};
        raw(&v, sizeof v);
        return v;
    }

    void guard_size(std::uint64_t n) {
        if (n > (std::uint64_t{1} << 34)) throw FormatError(source_ + ": implausible element count");
    }

    void raw(void* p, std::size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is_) throw FormatError(source_ + ": unexpected end of file");
    }

    std::istream& is_;
    std::string source_;
};

} // namespace courage::io
