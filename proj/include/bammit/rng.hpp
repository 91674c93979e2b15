#pragma once

#include <cstdint>

namespace bammit {

/// Deterministic random number generator with cheap substream derivation.
///
/// Core generator is xoshiro256++ seeded through a splitmix64 expansion of
/// (seed, stream). Identical (seed, stream) pairs produce identical draws on
/// every platform; distribution transforms below are implemented here rather
/// than with std::<distribution> so the byte-level output is portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent generator derived from the same base seed.
    Rng substream(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint64_t next_u64();

    /// Uniform on (0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via the polar (Marsaglia) method.
    double normal();
    double normal(double mean, double sd);

    /// Gamma(shape, rate) via Marsaglia-Tsang.
    double gamma(double shape, double rate);

    /// Normal(mean, sd) truncated to [lo, hi]. Bounds may be +-infinity.
    /// Uses plain rejection when the interval has decent mass and Robert's
    /// exponential-envelope rejection in the tails.
    double trunc_normal(double mean, double sd, double lo, double hi);

    /// |t_df| * scale: a draw from the half-t(df, scale) distribution.
    double half_t(double df, double scale);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t stream_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// log density of the half-t(df, scale) distribution at x > 0.
double half_t_logpdf(double x, double df, double scale);

}  // namespace bammit
