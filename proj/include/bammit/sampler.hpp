#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bammit/model.hpp"
#include "bammit/rng.hpp"

namespace bammit {

/// MCMC run settings. Defaults follow the three-chain, 4000-iteration,
/// half burn-in, thin-2 protocol.
struct McmcConfig {
    int n_chains = 3;
    int n_iter = 4000;
    int n_burn = 2000;
    int thin = 2;
    std::size_t q = 1;                  // fitted number of components
    std::uint64_t seed = 1;
    int adapt_window = 2000;            // step-size adaptation horizon (within burn-in)
    double target_accept = 0.35;        // column-block random walks
    double target_accept_scalar = 0.44; // scalar log-scale random walks

    void validate() const;
    int draws_per_chain() const { return (n_iter - n_burn) / thin; }
};

/// Enables the AR(1) time structure for one factor.
struct ArConfig {
    std::size_t time_factor = 0;
    double alpha_prior_var = 100.0;   // Normal(0, this) prior on alpha_b, alpha_theta
    double innovation_scale = 1.0;    // half-t scale for sigma_eta, sigma_omega
};

struct ScalarDiagnostic {
    std::string name;
    double rhat = 0.0;
    double ess = 0.0;
};

/// Thinned post-burn-in draws across chains.
struct PosteriorDraws {
    FactorLayout layout;
    McmcConfig config;
    std::optional<ArConfig> ar;
    std::vector<std::vector<ParameterState>> chains;   // [chain][draw]
    std::map<std::string, double> acceptance_rates;    // per update block
    std::vector<ScalarDiagnostic> diagnostics;

    std::size_t n_draws_total() const;
    /// Pooled draw access: draws in chain order, then draw order.
    const ParameterState& pooled(std::size_t i) const;
    const ScalarDiagnostic* find_diagnostic(const std::string& name) const;
};

struct NormalMoments {
    double mean = 0.0;
    double var = 0.0;
};

struct TruncNormalMoments {
    double mean = 0.0;
    double var = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct GammaParams {
    double shape = 0.0;
    double rate = 0.0;
};

/// One chain's Metropolis-within-Gibbs engine. Updates are conjugate Gibbs
/// draws where conjugacy holds (mu, main effects, lambda, residual precision)
/// and random-walk Metropolis elsewhere (theta columns, half-t scales, AR
/// block). The conditional-moment helpers expose the closed forms used by
/// the Gibbs draws.
class GibbsSampler {
public:
    GibbsSampler(const Dataset& data, const PriorConfig& priors, std::size_t q, Rng rng,
                 std::optional<ArConfig> ar = std::nullopt);
    ~GibbsSampler();
    GibbsSampler(GibbsSampler&&) noexcept;
    GibbsSampler& operator=(GibbsSampler&&) noexcept;

    /// Default initialization: mu and sigma2 from data moments, b and theta
    /// from the priors, lambda spread over [0.5, 1.5] * SD(y).
    void init_state();
    void set_state(const ParameterState& state);
    const ParameterState& state() const;

    void update_mu();
    void update_main_effects();
    void update_theta();
    void update_lambda();
    void update_variances();
    void update_ar_block();

    /// One full iteration: mu -> main effects -> theta -> lambda -> variances
    /// (-> AR block). `adapt` enables step-size tuning for this sweep.
    void sweep(bool adapt);

    // Closed-form conditional moments (state held fixed).
    NormalMoments mu_conditional() const;
    NormalMoments main_effect_conditional(std::size_t v, std::size_t i) const;
    TruncNormalMoments lambda_conditional(std::size_t q) const;
    GammaParams precision_conditional() const;

    double acceptance_rate(const std::string& block) const;
    std::map<std::string, double> acceptance_rates() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

using ProgressCallback = std::function<void(int chain, int iter, int n_iter)>;

/// Run independent chains (in parallel, one rng substream per chain) and
/// collect thinned post-burn-in draws plus split-Rhat/ESS diagnostics for
/// mu, sigma, every lambda_q and every main effect.
PosteriorDraws run_chains(const Dataset& data, const PriorConfig& priors,
                          const McmcConfig& mcmc,
                          const std::optional<ArConfig>& ar = std::nullopt,
                          const ProgressCallback& progress = nullptr,
                          int progress_every = 500);

/// Split-chain potential scale reduction. Needs >= 2 chains of >= 4 draws.
double rhat(const std::vector<std::vector<double>>& chain_traces);

/// Autocorrelation-based effective sample size (Geyer initial positive
/// sequence), capped at the total draw count.
double ess(const std::vector<std::vector<double>>& chain_traces);

/// Trace extraction by name: "mu", "sigma", "sigma2", "lambda[q]" (1-based),
/// "b[v][i]" (1-based), "phi_b", "phi_theta".
std::vector<std::vector<double>> extract_traces(const PosteriorDraws& draws,
                                                const std::string& name);

}  // namespace bammit
