#include "bammit/rng.hpp"

#include <cmath>
#include <limits>

namespace bammit {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (auto& w : s_) w = splitmix64(x);
    // All-zero state is invalid for xoshiro; splitmix64 output makes this
    // astronomically unlikely, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    // 53-bit mantissa, shifted into (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * m;
    has_cached_normal_ = true;
    return u * m;
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::gamma(double shape, double rate) {
    if (shape < 1.0) {
        // Boost: G(a) = G(a+1) * U^{1/a}.
        const double u = uniform();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

namespace {

/// One-sided truncated standard normal on [a, inf), a arbitrary.
double rtnorm_lower(Rng& rng, double a) {
    if (a <= 0.0) {
        for (;;) {
            const double z = rng.normal();
            if (z >= a) return z;
        }
    }
    // Robert (1995) exponential envelope.
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double z = a - std::log(rng.uniform()) / alpha;
        const double d = z - alpha;
        if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
    }
}

}  // namespace

double Rng::trunc_normal(double mean, double sd, double lo, double hi) {
    const double inf = std::numeric_limits<double>::infinity();
    double a = (lo == -inf) ? -inf : (lo - mean) / sd;
    double b = (hi == inf) ? inf : (hi - mean) / sd;
    if (!(a < b)) return mean + sd * a;  // empty/point interval: clamp

    double z;
    if (a == -inf && b == inf) {
        z = normal();
    } else if (b == inf) {
        z = rtnorm_lower(*this, a);
    } else if (a == -inf) {
        z = -rtnorm_lower(*this, -b);
    } else if (a < 2.0 && b > -2.0 && (b - a) > 0.25) {
        // Interval carries enough normal mass: plain rejection.
        for (;;) {
            z = normal();
            if (z >= a && z <= b) break;
        }
    } else {
        // Narrow or far-tail interval: uniform proposal with exact ratio.
        // Density on [a,b] is proportional to exp(-(z^2 - m^2)/2) where m is
        // the mode location within the interval.
        const double m = (a > 0.0) ? a : (b < 0.0 ? b : 0.0);
        for (;;) {
            z = uniform(a, b);
            if (std::log(uniform()) <= 0.5 * (m * m - z * z)) break;
        }
    }
    return mean + sd * z;
}

double Rng::half_t(double df, double scale) {
    const double z = normal();
    const double g = gamma(0.5 * df, 0.5 * df);
    return std::fabs(z / std::sqrt(g)) * scale;
}

double half_t_logpdf(double x, double df, double scale) {
    if (x < 0.0) return -std::numeric_limits<double>::infinity();
    const double r = x / scale;
    return std::log(2.0) + std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
           0.5 * std::log(df * M_PI) - std::log(scale) -
           0.5 * (df + 1.0) * std::log1p(r * r / df);
}

}  // namespace bammit
