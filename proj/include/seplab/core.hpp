// core.hpp — metrics, ball projections, domain clipping, seeded RNG.
//
// Everything downstream (separation scans, attacks, training) builds on the
// primitives in this header. All feature arithmetic is double precision;
// datasets sourced from 8-bit pixels keep a parallel integer representation
// (see dataset.hpp) so reported distances are exact multiples of 1/255.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace seplab {

inline constexpr const char* kVersion = "0.1.0";

using Vector = std::vector<double>;

// Rejected input (caller error): maps to CLI exit code 1.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed file or on-disk data: maps to CLI exit code 2.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric divergence (NaN loss, non-finite parameters): CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Metric { Linf, L2 };

inline const char* metric_name(Metric m) {
    return m == Metric::Linf ? "linf" : "l2";
}

inline Metric metric_from_name(const std::string& s) {
    if (s == "linf") return Metric::Linf;
    if (s == "l2") return Metric::L2;
    throw InputError("unknown metric '" + s + "' (expected linf or l2)");
}

// 17 significant digits: every double round-trips exactly through this.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void require_same_dim(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw InputError("dimension mismatch: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
}

// Little-endian scalar IO for the flat binary formats (x86-64 native order).
template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
    T value;
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw FormatError(std::string("truncated file while reading ") + what);
    return value;
}

}  // namespace detail

inline double dist(Metric metric, const Vector& a, const Vector& b) {
    detail::require_same_dim(a, b);
    if (metric == Metric::Linf) {
        double best = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            best = std::max(best, std::abs(a[i] - b[i]));
        return best;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Pruned Linf distance. Returns the exact distance when it is < bound,
// otherwise Exceeded. Scanning stops at the first coordinate gap >= bound.
struct EarlyExit {
    bool exceeded;
    double value;  // meaningful only when !exceeded
};

inline EarlyExit dist_early_exit(const Vector& a, const Vector& b, double bound) {
    detail::require_same_dim(a, b);
    if (bound < 0.0) throw InputError("dist_early_exit: bound must be >= 0");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double gap = std::abs(a[i] - b[i]);
        if (gap > best) {
            best = gap;
            if (best >= bound) return {true, 0.0};
        }
    }
    if (best >= bound) return {true, 0.0};
    return {false, best};
}

// Nearest point to x inside the metric ball B(center, eps). For Linf this is
// coordinatewise clamping; for L2 it is radial projection onto the sphere.
inline Vector project_ball(const Vector& x, const Vector& center, double eps,
                           Metric metric) {
    detail::require_same_dim(x, center);
    if (eps < 0.0) throw InputError("project_ball: eps must be >= 0");
    Vector out(x.size());
    if (metric == Metric::Linf) {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = std::clamp(x[i], center[i] - eps, center[i] + eps);
        return out;
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center[i];
        norm2 += d * d;
    }
    const double norm = std::sqrt(norm2);
    if (norm <= eps) return x;
    const double scale = eps / norm;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = center[i] + (x[i] - center[i]) * scale;
    return out;
}

inline Vector clip_domain(const Vector& x, double lo, double hi) {
    if (lo > hi) throw InputError("clip_domain: lo > hi");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo, hi);
    return out;
}

// Deterministic, platform-independent random stream: xoshiro256++ seeded via
// splitmix64. Identical seeds give identical draw sequences everywhere; there
// is no global random state. Parallel code derives child streams from
// (seed, key) via derive() instead of sharing one stream.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1): top 53 bits scaled by 2^-53.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, n) via 128-bit multiply (Lemire reduction, no rejection).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw InputError("uniform_int: n must be > 0");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Seed-split: independent child stream, a pure function of (seed, key).
    RandomStream derive(std::uint64_t key) const {
        std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ULL * (key + 1);
        return RandomStream(splitmix64(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    std::uint64_t seed_;
};

}  // namespace seplab
