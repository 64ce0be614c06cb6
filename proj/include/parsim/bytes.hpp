#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsim {

using Bytes = std::vector<std::uint8_t>;

// Big-endian byte encoding. Everything that crosses an LP boundary goes
// through these two classes, so the wire format is platform independent.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { be(v, 2); }
    void u32(std::uint32_t v) { be(v, 4); }
    void u64(std::uint64_t v) { be(v, 8); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void blob(const Bytes& b) {
        u32(static_cast<std::uint32_t>(b.size()));
        buf_.insert(buf_.end(), b.begin(), b.end());
    }
    void raw(const std::uint8_t* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

    Bytes take() { return std::move(buf_); }
    const Bytes& data() const { return buf_; }

private:
    void be(std::uint64_t v, int n) {
        for (int i = n - 1; i >= 0; --i)
            buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(const Bytes& b) : p_(b.data()), n_(b.size()) {}
    ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
    std::uint64_t u64() { return be(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    std::string str() {
        std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(p_ + off_), len);
        off_ += len;
        return s;
    }
    Bytes blob() {
        std::uint32_t len = u32();
        need(len);
        Bytes b(p_ + off_, p_ + off_ + len);
        off_ += len;
        return b;
    }

    bool done() const { return off_ == n_; }
    std::size_t remaining() const { return n_ - off_; }

private:
    std::uint64_t be(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | p_[off_ + i];
        off_ += n;
        return v;
    }
    void need(std::size_t n) const {
        if (off_ + n > n_) throw std::runtime_error("byte decode past end of buffer");
    }

    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t off_ = 0;
};

}  // namespace parsim
