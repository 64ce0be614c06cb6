#include "parsim/time.hpp"

#include <cctype>
#include <cstdlib>

namespace parsim {

std::string SimTime::to_string() const {
    if (is_max()) return "inf";
    std::int64_t t = ticks_;
    if (t != 0 && t % ticks_per_s == 0) return std::to_string(t / ticks_per_s) + "s";
    if (t != 0 && t % ticks_per_ms == 0) return std::to_string(t / ticks_per_ms) + "ms";
    if (t != 0 && t % ticks_per_us == 0) return std::to_string(t / ticks_per_us) + "us";
    if (t != 0 && t % ticks_per_ns == 0) return std::to_string(t / ticks_per_ns) + "ns";
    return std::to_string(t) + "ps";
}

SimTime parse_duration(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty duration");
    std::size_t pos = 0;
    long long value;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed duration: " + text);
    }
    std::string suffix = text.substr(pos);
    while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
        suffix.erase(suffix.begin());
    if (suffix.empty() || suffix == "ps") return SimTime(value);
    if (suffix == "ns") return SimTime::from_ns(value);
    if (suffix == "us") return SimTime::from_us(value);
    if (suffix == "ms") return SimTime::from_ms(value);
    if (suffix == "s") return SimTime::from_s(value);
    throw std::invalid_argument("unknown duration suffix in: " + text);
}

}  // namespace parsim
