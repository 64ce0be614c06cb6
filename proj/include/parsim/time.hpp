#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace parsim {

// Discrete simulation timestamp in integer picoseconds. Integer arithmetic
// keeps results bit-identical across LPs; overflow is a fatal error, never
// silent wraparound.
class SimTime {
public:
    constexpr SimTime() noexcept : ticks_(0) {}
    constexpr explicit SimTime(std::int64_t ticks) noexcept : ticks_(ticks) {}

    static constexpr SimTime zero() noexcept { return SimTime(0); }
    static constexpr SimTime max() noexcept {
        return SimTime(std::numeric_limits<std::int64_t>::max());
    }

    static constexpr std::int64_t ticks_per_ns = 1'000;
    static constexpr std::int64_t ticks_per_us = 1'000'000;
    static constexpr std::int64_t ticks_per_ms = 1'000'000'000;
    static constexpr std::int64_t ticks_per_s = 1'000'000'000'000;

    static SimTime from_ns(std::int64_t v) { return mul(v, ticks_per_ns); }
    static SimTime from_us(std::int64_t v) { return mul(v, ticks_per_us); }
    static SimTime from_ms(std::int64_t v) { return mul(v, ticks_per_ms); }
    static SimTime from_s(std::int64_t v) { return mul(v, ticks_per_s); }

    constexpr std::int64_t ticks() const noexcept { return ticks_; }
    constexpr bool is_max() const noexcept {
        return ticks_ == std::numeric_limits<std::int64_t>::max();
    }

    SimTime operator+(SimTime o) const {
        std::int64_t r;
        if (__builtin_add_overflow(ticks_, o.ticks_, &r))
            throw std::overflow_error("SimTime addition overflow");
        return SimTime(r);
    }
    SimTime operator-(SimTime o) const {
        std::int64_t r;
        if (__builtin_sub_overflow(ticks_, o.ticks_, &r))
            throw std::overflow_error("SimTime subtraction overflow");
        return SimTime(r);
    }

    // Addition that clamps at max() instead of failing; used for EOT
    // bookkeeping where max() is the "no more output ever" sentinel.
    SimTime saturating_add(SimTime o) const noexcept {
        std::int64_t r;
        if (__builtin_add_overflow(ticks_, o.ticks_, &r))
            return max();
        return SimTime(r);
    }

    constexpr auto operator<=>(const SimTime&) const noexcept = default;

    std::string to_string() const;

private:
    static SimTime mul(std::int64_t v, std::int64_t f) {
        std::int64_t r;
        if (__builtin_mul_overflow(v, f, &r))
            throw std::overflow_error("SimTime unit conversion overflow");
        return SimTime(r);
    }

    std::int64_t ticks_;
};

// Parses duration literals like "10ns", "100us", "5ms", "1s" or a bare
// tick count. Throws std::invalid_argument on malformed input.
SimTime parse_duration(const std::string& text);

}  // namespace parsim
