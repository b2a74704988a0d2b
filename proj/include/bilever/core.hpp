#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bilever {

using Bit = std::uint8_t;      // 0 or 1
using NodeId = int;            // dense global index; side-B offset after side-A
using GeneralId = int;

enum class Side { A, B };

/// Thrown when a configuration violates a resilience or well-formedness bound.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an input file or script fails to parse.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact rational in lowest terms, used for elimination thresholds.
struct Ratio {
    long long num = 0;
    long long den = 1;

    Ratio() = default;
    Ratio(long long n, long long d) : num(n), den(d) {
        if (den <= 0) throw ConfigError("rational denominator must be positive");
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return double(num) / double(den); }

    // count >= ratio * scale, evaluated exactly in integers
    bool reached_by(long long count, long long scale) const {
        return count * den >= num * scale;
    }
};

inline Ratio parse_ratio(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            double v = std::stod(s);
            // accept short decimals like 0.75 by scaling
            long long den = 1;
            while (v != static_cast<long long>(v) && den < 1000000) { v *= 10; den *= 10; }
            return Ratio(static_cast<long long>(v), den);
        }
        return Ratio(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
        throw ParseError("cannot parse rational: " + s);
    }
}

/// splitmix64: the portable 64-bit generator used for all seeded randomness.
/// Stateless hashing form so that script bits can be sliced by index.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 1)));
}

/// Small deterministic RNG over splitmix64 for test generators and sampling.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() { return splitmix64(state_++); }
    // uniform in [0, bound)
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }
    Bit next_bit() { return static_cast<Bit>(next() & 1); }
    double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace bilever
