#include "bammit/ar.hpp"

#include <cmath>

#include "bammit/errors.hpp"

namespace bammit {

std::vector<double> ar_trajectory(double alpha, double phi, double sigma, std::size_t t_len,
                                  double x0, Rng& rng) {
    if (t_len < 2) throw ArgumentError("AR trajectory needs T >= 2");
    std::vector<double> x(t_len);
    double prev = x0;
    for (std::size_t t = 0; t < t_len; ++t) {
        x[t] = alpha + phi * prev + (sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0);
        prev = x[t];
    }
    return x;
}

ArTimeEffects ar_simulate_time_effects(const ArParams& params, std::size_t t_len,
                                       std::size_t q, Rng& rng) {
    ArTimeEffects out;
    out.b_time = ar_trajectory(params.alpha_b, params.phi_b, params.sigma_eta, t_len, 0.0, rng);
    double mean = 0.0;
    for (double x : out.b_time) mean += x;
    mean /= static_cast<double>(t_len);
    for (double& x : out.b_time) x -= mean;

    out.theta_time.reserve(q);
    out.beta_time.reserve(q);
    for (std::size_t k = 0; k < q; ++k) {
        auto theta = ar_trajectory(params.alpha_theta, params.phi_theta, params.sigma_omega,
                                   t_len, 0.0, rng);
        out.beta_time.push_back(normalize_column(theta));
        out.theta_time.push_back(std::move(theta));
    }
    return out;
}

double ar_log_density(const std::vector<double>& x, double alpha, double phi, double sigma) {
    const double log_norm = -0.5 * std::log(2.0 * M_PI) - std::log(sigma);
    double lp = 0.0;
    double prev = 0.0;
    for (double xt : x) {
        const double e = (xt - alpha - phi * prev) / sigma;
        lp += log_norm - 0.5 * e * e;
        prev = xt;
    }
    return lp;
}

double reflect_into_unit_interval(double x) {
    // Fold the real line onto [-1, 1] by repeated reflection at the ends.
    while (x < -1.0 || x > 1.0) {
        if (x > 1.0) x = 2.0 - x;
        if (x < -1.0) x = -2.0 - x;
    }
    return x;
}

}  // namespace bammit
