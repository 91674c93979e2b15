#include "bammit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Dense>

#include "bammit/ar.hpp"
#include "bammit/errors.hpp"

namespace bammit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * std::log(2.0 * M_PI) - std::log(sd) - 0.5 * z * z;
}

// Half-normal at zero: density 2 phi(x / sigma) / sigma for x >= 0.
double log_half_normal_pdf(double x, double sigma) {
    if (x < 0.0) return -kInf;
    return std::log(2.0) + log_normal_pdf(x, 0.0, sigma);
}
}  // namespace

void McmcConfig::validate() const {
    if (n_chains < 1) throw ArgumentError("n_chains must be >= 1");
    if (n_iter < 1) throw ArgumentError("n_iter must be >= 1");
    if (n_burn < 0 || n_burn >= n_iter) throw ArgumentError("need 0 <= n_burn < n_iter");
    if (thin < 1) throw ArgumentError("thin must be >= 1");
    if (q < 1) throw ArgumentError("Q must be >= 1");
    if (target_accept <= 0.0 || target_accept >= 1.0 || target_accept_scalar <= 0.0 ||
        target_accept_scalar >= 1.0)
        throw ArgumentError("target acceptance rates must lie in (0, 1)");
}

std::size_t PosteriorDraws::n_draws_total() const {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.size();
    return n;
}

const ParameterState& PosteriorDraws::pooled(std::size_t i) const {
    for (const auto& c : chains) {
        if (i < c.size()) return c[i];
        i -= c.size();
    }
    throw IndexError("pooled draw index out of range");
}

const ScalarDiagnostic* PosteriorDraws::find_diagnostic(const std::string& name) const {
    for (const auto& d : diagnostics)
        if (d.name == name) return &d;
    return nullptr;
}

// ---------------------------------------------------------------------------

struct GibbsSampler::Impl {
    Dataset data;
    PriorConfig priors;
    std::size_t Q;
    std::optional<ArConfig> ar_config;
    Rng rng;
    FactorLayout layout;
    std::size_t V = 0;
    std::size_t n_obs = 0;

    std::vector<std::vector<std::vector<std::size_t>>> obs_by_level;  // [v][i]

    ParameterState state;
    std::vector<double> resid;     // y_n - predictor_n
    std::vector<double> multcoef;  // n_obs x Q, row-major: prod_v beta[v][q][cell_v]

    // Scratch buffers for theta proposals.
    std::vector<double> scratch_mult, scratch_resid;

    // Adaptive Metropolis bookkeeping: one scale + window counter per block.
    struct Tuned {
        double scale = 0.3;
        long acc = 0, tot = 0;        // lifetime
        long wacc = 0, wtot = 0;      // current adaptation window
        int batch = 0;
    };
    std::vector<std::vector<Tuned>> theta_tune;  // [v][q]
    std::vector<Tuned> sigma_b_tune;             // [v]
    Tuned sigma_lambda_tune;
    Tuned ar_phi_b_tune, ar_alpha_b_tune, ar_sigma_eta_tune;
    Tuned ar_phi_theta_tune, ar_alpha_theta_tune, ar_sigma_omega_tune;

    bool adapting = false;
    int iter_count = 0;

    Impl(const Dataset& d, const PriorConfig& p, std::size_t q, Rng r,
         std::optional<ArConfig> ar)
        : data(d), priors(p), Q(q), ar_config(ar), rng(r) {
        if (data.records.empty()) throw EmptyData("dataset has no records");
        priors.validate();
        data.validate();
        layout = data.layout;
        layout.q = Q;
        V = layout.n_factors();
        n_obs = data.records.size();
        if (ar_config && ar_config->time_factor >= V)
            throw ArgumentError("ar.time_factor out of range");

        obs_by_level.resize(V);
        for (std::size_t v = 0; v < V; ++v) obs_by_level[v].resize(layout.dims[v]);
        for (std::size_t n = 0; n < n_obs; ++n)
            for (std::size_t v = 0; v < V; ++v)
                obs_by_level[v][data.records[n].cell[v]].push_back(n);

        resid.assign(n_obs, 0.0);
        multcoef.assign(n_obs * Q, 0.0);
        scratch_mult.assign(n_obs, 0.0);
        scratch_resid.assign(n_obs, 0.0);

        theta_tune.assign(V, std::vector<Tuned>(Q));
        sigma_b_tune.assign(V, Tuned{});
        state = ParameterState::zeros(layout);
        if (ar_config) {
            ArParams ap;
            ap.time_factor = ar_config->time_factor;
            state.ar = ap;
        }
    }

    bool is_ar_factor(std::size_t v) const {
        return ar_config && state.ar && ar_config->time_factor == v;
    }

    double mult(std::size_t n, std::size_t q) const { return multcoef[n * Q + q]; }

    void refresh_cache() {
        for (std::size_t n = 0; n < n_obs; ++n) {
            const auto& cell = data.records[n].cell;
            double pred = state.mu;
            for (std::size_t v = 0; v < V; ++v) pred += state.main_effects[v][cell[v]];
            for (std::size_t q = 0; q < Q; ++q) {
                double prod = 1.0;
                for (std::size_t v = 0; v < V; ++v) prod *= state.beta[v][q][cell[v]];
                multcoef[n * Q + q] = prod;
                pred += state.lambda[q] * prod;
            }
            resid[n] = data.records[n].y - pred;
        }
    }

    double sse() const {
        double s = 0.0;
        for (double r : resid) s += r * r;
        return s;
    }

    void record(Tuned& t, bool accepted, double target) {
        t.tot++;
        t.wtot++;
        if (accepted) {
            t.acc++;
            t.wacc++;
        }
        if (adapting && t.wtot >= 50) {
            const double rate = static_cast<double>(t.wacc) / static_cast<double>(t.wtot);
            t.batch++;
            t.scale *= std::exp((rate - target) / std::sqrt(static_cast<double>(t.batch)));
            t.scale = std::clamp(t.scale, 1e-5, 50.0);
            t.wacc = t.wtot = 0;
        }
    }

    // ---- conditional moments -------------------------------------------

    NormalMoments mu_conditional() const {
        double sum_r = 0.0;
        for (double r : resid) sum_r += r;
        sum_r += static_cast<double>(n_obs) * state.mu;  // residuals excluding mu
        const double prec =
            1.0 / priors.mu_var + static_cast<double>(n_obs) / state.sigma2_y;
        const double mean =
            (priors.mu_mean / priors.mu_var + sum_r / state.sigma2_y) / prec;
        return {mean, 1.0 / prec};
    }

    NormalMoments main_effect_conditional(std::size_t v, std::size_t i) const {
        double prior_prec, prior_mean_prec;
        if (is_ar_factor(v)) {
            // AR(1) conditional prior given the neighbouring time points.
            const auto& ap = *state.ar;
            const auto& b = state.main_effects[v];
            const std::size_t T = b.size();
            const double s2 = ap.sigma_eta * ap.sigma_eta;
            const double prev = (i == 0) ? 0.0 : b[i - 1];
            prior_prec = 1.0 / s2;
            prior_mean_prec = (ap.alpha_b + ap.phi_b * prev) / s2;
            if (i + 1 < T) {
                prior_prec += ap.phi_b * ap.phi_b / s2;
                prior_mean_prec += ap.phi_b * (b[i + 1] - ap.alpha_b) / s2;
            }
        } else {
            const double s2 = state.sigma_b[v] * state.sigma_b[v];
            prior_prec = 1.0 / s2;
            prior_mean_prec = 0.0;
        }
        double like_prec = 0.0, like_mean_prec = 0.0;
        const double bi = state.main_effects[v][i];
        for (std::size_t n : obs_by_level[v][i]) {
            like_prec += 1.0 / state.sigma2_y;
            like_mean_prec += (resid[n] + bi) / state.sigma2_y;
        }
        const double prec = prior_prec + like_prec;
        return {(prior_mean_prec + like_mean_prec) / prec, 1.0 / prec};
    }

    TruncNormalMoments lambda_conditional(std::size_t q) const {
        const double s2 = state.sigma2_y;
        double cc = 0.0, cr = 0.0;
        const double lq = state.lambda[q];
        for (std::size_t n = 0; n < n_obs; ++n) {
            const double c = mult(n, q);
            cc += c * c;
            cr += c * (resid[n] + lq * c);
        }
        const double prec = 1.0 / (state.sigma_lambda * state.sigma_lambda) + cc / s2;
        TruncNormalMoments m;
        m.mean = (cr / s2) / prec;
        m.var = 1.0 / prec;
        m.lo = (q + 1 < Q) ? state.lambda[q + 1] : 0.0;
        m.hi = (q > 0) ? state.lambda[q - 1] : kInf;
        return m;
    }

    GammaParams precision_conditional() const {
        return {priors.a0 + 0.5 * static_cast<double>(n_obs), priors.a1 + 0.5 * sse()};
    }

    // ---- updates --------------------------------------------------------

    void update_mu() {
        const auto m = mu_conditional();
        const double new_mu = rng.normal(m.mean, std::sqrt(m.var));
        const double delta = new_mu - state.mu;
        state.mu = new_mu;
        for (double& r : resid) r -= delta;
    }

    void update_main_effects() {
        for (std::size_t v = 0; v < V; ++v) {
            auto& b = state.main_effects[v];
            for (std::size_t i = 0; i < b.size(); ++i) {
                const auto m = main_effect_conditional(v, i);
                const double new_b = rng.normal(m.mean, std::sqrt(m.var));
                const double delta = new_b - b[i];
                b[i] = new_b;
                for (std::size_t n : obs_by_level[v][i]) resid[n] -= delta;
            }
            // Project onto the zero-sum constraint; the shift moves into the
            // residuals and is absorbed by mu at the next sweep.
            double mean = 0.0;
            for (double x : b) mean += x;
            mean /= static_cast<double>(b.size());
            for (double& x : b) x -= mean;
            for (double& r : resid) r += mean;
        }
    }

    double theta_log_prior(std::size_t v, const std::vector<double>& col) const {
        if (is_ar_factor(v)) {
            const auto& ap = *state.ar;
            return ar_log_density(col, ap.alpha_theta, ap.phi_theta, ap.sigma_omega);
        }
        double lp = 0.0;
        for (double t : col) lp -= 0.5 * t * t;
        return lp;
    }

    void update_theta() {
        const double s2 = state.sigma2_y;
        for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t q = 0; q < Q; ++q) {
                Tuned& tune = theta_tune[v][q];
                const auto& old_col = state.theta[v][q];
                std::vector<double> cand(old_col.size());
                for (std::size_t i = 0; i < cand.size(); ++i)
                    cand[i] = old_col[i] + tune.scale * rng.normal();

                std::vector<double> cand_beta;
                try {
                    cand_beta = normalize_column(cand);
                } catch (const DegenerateInput&) {
                    record(tune, false, 0.35);
                    continue;
                }

                double delta = theta_log_prior(v, cand) - theta_log_prior(v, old_col);
                const double lq = state.lambda[q];
                for (std::size_t n = 0; n < n_obs; ++n) {
                    const auto& cell = data.records[n].cell;
                    double prod = cand_beta[cell[v]];
                    for (std::size_t w = 0; w < V; ++w)
                        if (w != v) prod *= state.beta[w][q][cell[w]];
                    scratch_mult[n] = prod;
                    const double new_r = resid[n] + lq * (mult(n, q) - prod);
                    scratch_resid[n] = new_r;
                    delta += 0.5 * (resid[n] * resid[n] - new_r * new_r) / s2;
                }
                const bool accept = std::log(rng.uniform()) < delta;
                if (accept) {
                    state.theta[v][q] = std::move(cand);
                    state.beta[v][q] = std::move(cand_beta);
                    for (std::size_t n = 0; n < n_obs; ++n) {
                        multcoef[n * Q + q] = scratch_mult[n];
                        resid[n] = scratch_resid[n];
                    }
                }
                record(tune, accept, 0.35);
            }
        }
    }

    void update_lambda() {
        for (std::size_t q = 0; q < Q; ++q) {
            const auto m = lambda_conditional(q);
            const double new_l = rng.trunc_normal(m.mean, std::sqrt(m.var), m.lo, m.hi);
            const double old_l = state.lambda[q];
            state.lambda[q] = new_l;
            for (std::size_t n = 0; n < n_obs; ++n)
                resid[n] += (old_l - new_l) * mult(n, q);
        }
    }

    // Log-scale random walk against an arbitrary target on sigma > 0.
    template <typename LogTarget>
    void scalar_scale_update(double& sigma, Tuned& tune, LogTarget target) {
        const double log_old = std::log(sigma);
        const double log_cand = log_old + tune.scale * rng.normal();
        const double cand = std::exp(log_cand);
        // Jacobian of the log transform: + log sigma on each side.
        const double delta = target(cand) + log_cand - target(sigma) - log_old;
        const bool accept = std::log(rng.uniform()) < delta;
        if (accept) sigma = cand;
        record(tune, accept, 0.44);
    }

    void update_variances() {
        const auto g = precision_conditional();
        state.sigma2_y = 1.0 / rng.gamma(g.shape, g.rate);

        for (std::size_t v = 0; v < V; ++v) {
            if (is_ar_factor(v)) continue;  // the AR block owns this factor's scale
            const auto& b = state.main_effects[v];
            scalar_scale_update(state.sigma_b[v], sigma_b_tune[v], [&](double s) {
                double lp = half_t_logpdf(s, priors.half_t_df, priors.a2);
                for (double x : b) lp += log_normal_pdf(x, 0.0, s);
                return lp;
            });
        }

        scalar_scale_update(state.sigma_lambda, sigma_lambda_tune, [&](double s) {
            double lp = half_t_logpdf(s, priors.half_t_df, priors.a3);
            for (double l : state.lambda) lp += log_half_normal_pdf(l, s);
            return lp;
        });
    }

    void update_ar_block() {
        if (!ar_config || !state.ar) return;
        ArParams& ap = *state.ar;
        const auto& cfg = *ar_config;
        const auto& b = state.main_effects[cfg.time_factor];
        const auto& thetas = state.theta[cfg.time_factor];
        const double alpha_sd = std::sqrt(cfg.alpha_prior_var);

        auto b_density = [&](double alpha, double phi, double sigma) {
            return ar_log_density(b, alpha, phi, sigma);
        };
        auto theta_density = [&](double alpha, double phi, double sigma) {
            double lp = 0.0;
            for (const auto& col : thetas) lp += ar_log_density(col, alpha, phi, sigma);
            return lp;
        };

        // phi: symmetric random walk reflected into [-1, 1], flat prior.
        auto phi_update = [&](double& phi, Tuned& tune, auto density) {
            const double cand = reflect_into_unit_interval(phi + tune.scale * rng.normal());
            const double delta = density(cand) - density(phi);
            const bool accept = std::log(rng.uniform()) < delta;
            if (accept) phi = cand;
            record(tune, accept, 0.44);
        };
        phi_update(ap.phi_b, ar_phi_b_tune,
                   [&](double p) { return b_density(ap.alpha_b, p, ap.sigma_eta); });
        phi_update(ap.phi_theta, ar_phi_theta_tune,
                   [&](double p) { return theta_density(ap.alpha_theta, p, ap.sigma_omega); });

        auto alpha_update = [&](double& alpha, Tuned& tune, auto density) {
            const double cand = alpha + tune.scale * rng.normal();
            const double delta = density(cand) - density(alpha) +
                                 log_normal_pdf(cand, 0.0, alpha_sd) -
                                 log_normal_pdf(alpha, 0.0, alpha_sd);
            const bool accept = std::log(rng.uniform()) < delta;
            if (accept) alpha = cand;
            record(tune, accept, 0.44);
        };
        alpha_update(ap.alpha_b, ar_alpha_b_tune,
                     [&](double a) { return b_density(a, ap.phi_b, ap.sigma_eta); });
        alpha_update(ap.alpha_theta, ar_alpha_theta_tune,
                     [&](double a) { return theta_density(a, ap.phi_theta, ap.sigma_omega); });

        scalar_scale_update(ap.sigma_eta, ar_sigma_eta_tune, [&](double s) {
            return b_density(ap.alpha_b, ap.phi_b, s) +
                   half_t_logpdf(s, priors.half_t_df, cfg.innovation_scale);
        });
        scalar_scale_update(ap.sigma_omega, ar_sigma_omega_tune, [&](double s) {
            return theta_density(ap.alpha_theta, ap.phi_theta, s) +
                   half_t_logpdf(s, priors.half_t_df, cfg.innovation_scale);
        });
    }

    void check_finite() const {
        auto bad = [&](double x) { return !std::isfinite(x); };
        if (bad(state.mu)) throw NonFiniteState(iter_count, "mu");
        if (bad(state.sigma2_y) || state.sigma2_y <= 0.0)
            throw NonFiniteState(iter_count, "sigma2");
        for (double l : state.lambda)
            if (bad(l)) throw NonFiniteState(iter_count, "lambda");
        double s = 0.0;
        for (double r : resid) s += r * r;
        if (bad(s)) throw NonFiniteState(iter_count, "residuals");
    }

    void sweep(bool adapt) {
        adapting = adapt;
        update_mu();
        update_main_effects();
        update_theta();
        update_lambda();
        update_variances();
        update_ar_block();
        ++iter_count;
        // Incremental residual bookkeeping accumulates rounding drift;
        // refresh periodically.
        if (iter_count % 100 == 0) refresh_cache();
        check_finite();
    }

    // Data-driven starting points for the score columns: for each factor,
    // unfold the (mean- and main-effect-adjusted) residuals into a
    // level x rest-of-grid matrix and take its leading left singular vectors.
    // Random starts routinely leave a chain stranded with the interaction
    // absorbed into the noise for thousands of sweeps; seeding near the
    // empirical interaction subspace removes that failure mode while the
    // per-chain jitter added by the caller keeps the chains overdispersed.
    std::vector<std::vector<std::vector<double>>> interaction_svd_columns(
        const std::vector<std::vector<double>>& level_mean, double ybar,
        std::vector<double>& singular_values) const {
        std::vector<std::vector<std::vector<double>>> out;
        singular_values.clear();
        const std::size_t grid = layout.grid_size();
        if (grid > 1000000) return out;  // fall back to pure random starts
        out.resize(V);
        std::vector<double> r(n_obs);
        for (std::size_t n = 0; n < n_obs; ++n) {
            const auto& rec = data.records[n];
            double resid_n = rec.y - ybar;
            for (std::size_t w = 0; w < V; ++w) resid_n -= level_mean[w][rec.cell[w]];
            r[n] = resid_n;
        }
        for (std::size_t v = 0; v < V; ++v) {
            const std::size_t rows = layout.dims[v];
            const std::size_t cols = grid / rows;
            if (cols > 100000) continue;
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
            Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(rows, cols);
            for (std::size_t n = 0; n < n_obs; ++n) {
                const auto& rec = data.records[n];
                std::size_t col = 0;
                for (std::size_t w = 0; w < V; ++w) {
                    if (w == v) continue;
                    col = col * layout.dims[w] + rec.cell[w];
                }
                m(rec.cell[v], col) += r[n];
                counts(rec.cell[v], col) += 1.0;
            }
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    if (counts(i, j) > 0.0) m(i, j) /= counts(i, j);
            Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
            const std::size_t k = std::min<std::size_t>(Q, svd.matrixU().cols());
            out[v].resize(k);
            const double spread = std::sqrt(static_cast<double>(rows));
            for (std::size_t q = 0; q < k; ++q) {
                out[v][q].resize(rows);
                for (std::size_t i = 0; i < rows; ++i)
                    out[v][q][i] = svd.matrixU()(i, q) * spread;
            }
            // Each component of the cell-mean table factors as
            // weight x (unit row vector) x (unit column vector), so the
            // singular values estimate the component weights directly.
            if (singular_values.empty()) {
                for (std::size_t q = 0; q < k; ++q)
                    singular_values.push_back(svd.singularValues()(q));
            }
        }
        // Per-factor singular-vector signs are arbitrary, but the component
        // weights are constrained nonnegative: if the cross-factor product is
        // anti-correlated with the residuals, the weight's conditional pins
        // at zero and the chain starts in exactly the trap this seeding is
        // meant to avoid. Align the overall sign with the data.
        for (std::size_t q = 0; q < Q; ++q) {
            bool have_all = true;
            for (std::size_t v = 0; v < V; ++v)
                if (out[v].size() <= q) have_all = false;
            if (!have_all) continue;
            double corr = 0.0;
            for (std::size_t n = 0; n < n_obs; ++n) {
                const auto& rec = data.records[n];
                double prod = 1.0;
                for (std::size_t v = 0; v < V; ++v) prod *= out[v][q][rec.cell[v]];
                corr += prod * r[n];
            }
            if (corr < 0.0)
                for (double& x : out[0][q]) x = -x;
        }
        return out;
    }

    void init_state() {
        double ybar = 0.0;
        for (const auto& rec : data.records) ybar += rec.y;
        ybar /= static_cast<double>(n_obs);
        double yvar = 0.0;
        for (const auto& rec : data.records) yvar += (rec.y - ybar) * (rec.y - ybar);
        yvar = (n_obs > 1) ? yvar / static_cast<double>(n_obs - 1) : 1.0;
        const double ysd = std::sqrt(std::max(yvar, 1e-12));

        state = ParameterState::zeros(layout);
        state.mu = ybar;
        state.sigma2_y = std::max(yvar, 1e-12);
        state.sigma_lambda = std::max(1.0, ysd);
        // Quick marginal estimates of the main effects, used both to seed b
        // and to form interaction residuals for the score initialization.
        std::vector<std::vector<double>> level_mean(V);
        for (std::size_t v = 0; v < V; ++v) {
            level_mean[v].assign(layout.dims[v], 0.0);
            std::vector<std::size_t> counts(layout.dims[v], 0);
            for (const auto& rec : data.records) {
                level_mean[v][rec.cell[v]] += rec.y - ybar;
                ++counts[rec.cell[v]];
            }
            for (std::size_t i = 0; i < layout.dims[v]; ++i)
                if (counts[i] > 0) level_mean[v][i] /= static_cast<double>(counts[i]);
        }

        std::vector<double> singular_values;
        const auto svd_columns = interaction_svd_columns(level_mean, ybar, singular_values);
        // Start the component weights at the singular-value estimates: a weight
        // initialized far below its conditional mode leaves the scores free to
        // wander and the chain can take thousands of sweeps to lock back on.
        for (std::size_t q = 0; q < Q; ++q) {
            const double fallback =
                (Q == 1) ? ysd
                         : (1.5 - static_cast<double>(q) / static_cast<double>(Q - 1)) * ysd;
            state.lambda[q] = (q < singular_values.size() && singular_values[q] > 0.1 * ysd)
                                  ? singular_values[q]
                                  : std::min(fallback, q == 0 ? fallback : state.lambda[q - 1]);
        }
        for (std::size_t q = 1; q < Q; ++q)
            state.lambda[q] = std::min(state.lambda[q], state.lambda[q - 1]);
        for (std::size_t v = 0; v < V; ++v) {
            auto& b = state.main_effects[v];
            double mean = 0.0;
            for (std::size_t i = 0; i < b.size(); ++i) {
                b[i] = level_mean[v][i] + rng.normal(0.0, 0.3);
                mean += b[i];
            }
            mean /= static_cast<double>(b.size());
            for (double& x : b) x -= mean;
            for (std::size_t q = 0; q < Q; ++q) {
                std::vector<double> col(layout.dims[v]);
                const bool seeded = v < svd_columns.size() && q < svd_columns[v].size();
                for (std::size_t i = 0; i < col.size(); ++i) {
                    const double base = seeded ? svd_columns[v][q][i] : 0.0;
                    col[i] = base + rng.normal(0.0, seeded ? 0.2 : 1.0);
                }
                state.set_theta_column(v, q, col);
            }
        }
        if (ar_config) {
            ArParams ap;
            ap.time_factor = ar_config->time_factor;
            state.ar = ap;
        }
        refresh_cache();
    }
};

GibbsSampler::GibbsSampler(const Dataset& data, const PriorConfig& priors, std::size_t q,
                           Rng rng, std::optional<ArConfig> ar)
    : impl_(std::make_unique<Impl>(data, priors, q, rng, ar)) {}

GibbsSampler::~GibbsSampler() = default;
GibbsSampler::GibbsSampler(GibbsSampler&&) noexcept = default;
GibbsSampler& GibbsSampler::operator=(GibbsSampler&&) noexcept = default;

void GibbsSampler::init_state() { impl_->init_state(); }

void GibbsSampler::set_state(const ParameterState& state) {
    if (!state.matches(impl_->layout))
        throw LayoutMismatch("state does not match sampler layout");
    impl_->state = state;
    impl_->state.recompute_beta();
    impl_->refresh_cache();
}

const ParameterState& GibbsSampler::state() const { return impl_->state; }

void GibbsSampler::update_mu() { impl_->update_mu(); }
void GibbsSampler::update_main_effects() { impl_->update_main_effects(); }
void GibbsSampler::update_theta() { impl_->update_theta(); }
void GibbsSampler::update_lambda() { impl_->update_lambda(); }
void GibbsSampler::update_variances() { impl_->update_variances(); }
void GibbsSampler::update_ar_block() { impl_->update_ar_block(); }
void GibbsSampler::sweep(bool adapt) { impl_->sweep(adapt); }

NormalMoments GibbsSampler::mu_conditional() const { return impl_->mu_conditional(); }
NormalMoments GibbsSampler::main_effect_conditional(std::size_t v, std::size_t i) const {
    return impl_->main_effect_conditional(v, i);
}
TruncNormalMoments GibbsSampler::lambda_conditional(std::size_t q) const {
    return impl_->lambda_conditional(q);
}
GammaParams GibbsSampler::precision_conditional() const {
    return impl_->precision_conditional();
}

std::map<std::string, double> GibbsSampler::acceptance_rates() const {
    auto rate = [](const Impl::Tuned& t) {
        return t.tot > 0 ? static_cast<double>(t.acc) / static_cast<double>(t.tot) : 0.0;
    };
    std::map<std::string, double> out;
    long acc = 0, tot = 0;
    for (const auto& row : impl_->theta_tune)
        for (const auto& t : row) {
            acc += t.acc;
            tot += t.tot;
        }
    out["theta"] = tot > 0 ? static_cast<double>(acc) / static_cast<double>(tot) : 0.0;
    acc = tot = 0;
    for (const auto& t : impl_->sigma_b_tune) {
        acc += t.acc;
        tot += t.tot;
    }
    out["sigma_b"] = tot > 0 ? static_cast<double>(acc) / static_cast<double>(tot) : 0.0;
    out["sigma_lambda"] = rate(impl_->sigma_lambda_tune);
    if (impl_->ar_config) {
        out["ar_phi_b"] = rate(impl_->ar_phi_b_tune);
        out["ar_alpha_b"] = rate(impl_->ar_alpha_b_tune);
        out["ar_sigma_eta"] = rate(impl_->ar_sigma_eta_tune);
        out["ar_phi_theta"] = rate(impl_->ar_phi_theta_tune);
        out["ar_alpha_theta"] = rate(impl_->ar_alpha_theta_tune);
        out["ar_sigma_omega"] = rate(impl_->ar_sigma_omega_tune);
    }
    return out;
}

double GibbsSampler::acceptance_rate(const std::string& block) const {
    auto rates = acceptance_rates();
    auto it = rates.find(block);
    if (it == rates.end()) throw ArgumentError("unknown update block '" + block + "'");
    return it->second;
}

// ---------------------------------------------------------------------------

PosteriorDraws run_chains(const Dataset& data, const PriorConfig& priors,
                          const McmcConfig& mcmc, const std::optional<ArConfig>& ar,
                          const ProgressCallback& progress, int progress_every) {
    mcmc.validate();
    if (data.records.empty()) throw EmptyData("dataset has no records");

    PosteriorDraws draws;
    draws.layout = data.layout;
    draws.layout.q = mcmc.q;
    draws.config = mcmc;
    draws.ar = ar;
    draws.chains.resize(mcmc.n_chains);

    const int adapt_horizon = std::min(mcmc.adapt_window, mcmc.n_burn);
    std::vector<std::map<std::string, double>> chain_rates(mcmc.n_chains);
    std::vector<std::exception_ptr> failures(mcmc.n_chains);

    auto run_one = [&](int c) {
        try {
            GibbsSampler sampler(data, priors, mcmc.q,
                                 Rng(mcmc.seed, static_cast<std::uint64_t>(c) + 1), ar);
            sampler.init_state();
            auto& stored = draws.chains[c];
            stored.reserve(mcmc.draws_per_chain());
            for (int iter = 1; iter <= mcmc.n_iter; ++iter) {
                sampler.sweep(iter <= adapt_horizon);
                if (progress && iter % progress_every == 0) progress(c, iter, mcmc.n_iter);
                if (iter > mcmc.n_burn && (iter - mcmc.n_burn) % mcmc.thin == 0)
                    stored.push_back(sampler.state());
            }
            chain_rates[c] = sampler.acceptance_rates();
        } catch (...) {
            failures[c] = std::current_exception();
        }
    };

    if (mcmc.n_chains == 1) {
        run_one(0);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(mcmc.n_chains);
        for (int c = 0; c < mcmc.n_chains; ++c) workers.emplace_back(run_one, c);
        for (auto& w : workers) w.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    for (const auto& rates : chain_rates)
        for (const auto& [name, r] : rates)
            draws.acceptance_rates[name] += r / static_cast<double>(mcmc.n_chains);

    // Convergence diagnostics for every scalar of interest.
    std::vector<std::string> names = {"mu", "sigma"};
    for (std::size_t q = 0; q < mcmc.q; ++q)
        names.push_back("lambda[" + std::to_string(q + 1) + "]");
    for (std::size_t v = 0; v < draws.layout.n_factors(); ++v)
        for (std::size_t i = 0; i < draws.layout.dims[v]; ++i)
            names.push_back("b[" + std::to_string(v + 1) + "][" + std::to_string(i + 1) + "]");
    const bool can_diag = mcmc.n_chains >= 2 && mcmc.draws_per_chain() >= 4;
    for (const auto& name : names) {
        auto traces = extract_traces(draws, name);
        ScalarDiagnostic d;
        d.name = name;
        d.rhat = can_diag ? rhat(traces) : 1.0;
        d.ess = ess(traces);
        draws.diagnostics.push_back(d);
    }
    return draws;
}

// ---------------------------------------------------------------------------

namespace {

double scalar_from_state(const ParameterState& s, const std::string& name) {
    if (name == "mu") return s.mu;
    if (name == "sigma") return std::sqrt(s.sigma2_y);
    if (name == "sigma2") return s.sigma2_y;
    if (name == "sigma_lambda") return s.sigma_lambda;
    if (name == "phi_b") return s.ar ? s.ar->phi_b : 0.0;
    if (name == "phi_theta") return s.ar ? s.ar->phi_theta : 0.0;
    if (name.rfind("lambda[", 0) == 0) {
        const std::size_t q = std::stoul(name.substr(7));
        if (q < 1 || q > s.lambda.size()) throw ArgumentError("bad lambda index in " + name);
        return s.lambda[q - 1];
    }
    if (name.rfind("b[", 0) == 0) {
        const auto mid = name.find("][");
        const std::size_t v = std::stoul(name.substr(2, mid - 2));
        const std::size_t i = std::stoul(name.substr(mid + 2));
        if (v < 1 || v > s.main_effects.size() || i < 1 || i > s.main_effects[v - 1].size())
            throw ArgumentError("bad main-effect index in " + name);
        return s.main_effects[v - 1][i - 1];
    }
    throw ArgumentError("unknown trace name '" + name + "'");
}

}  // namespace

std::vector<std::vector<double>> extract_traces(const PosteriorDraws& draws,
                                                const std::string& name) {
    std::vector<std::vector<double>> traces;
    traces.reserve(draws.chains.size());
    for (const auto& chain : draws.chains) {
        std::vector<double> t;
        t.reserve(chain.size());
        for (const auto& s : chain) t.push_back(scalar_from_state(s, name));
        traces.push_back(std::move(t));
    }
    return traces;
}

double rhat(const std::vector<std::vector<double>>& chain_traces) {
    if (chain_traces.size() < 2) throw ArgumentError("rhat needs >= 2 chains");
    std::size_t n = chain_traces[0].size();
    for (const auto& c : chain_traces) n = std::min(n, c.size());
    if (n < 4) throw ArgumentError("rhat needs >= 4 draws per chain");

    // Split each chain in half.
    const std::size_t half = n / 2;
    std::vector<std::vector<double>> seqs;
    for (const auto& c : chain_traces) {
        seqs.emplace_back(c.begin(), c.begin() + half);
        seqs.emplace_back(c.begin() + half, c.begin() + 2 * half);
    }

    const double m = static_cast<double>(seqs.size());
    const double len = static_cast<double>(half);
    std::vector<double> means;
    double grand = 0.0, w = 0.0;
    for (const auto& s : seqs) {
        double mu = 0.0;
        for (double x : s) mu += x;
        mu /= len;
        means.push_back(mu);
        grand += mu / m;
        double var = 0.0;
        for (double x : s) var += (x - mu) * (x - mu);
        w += var / (len - 1.0) / m;
    }
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= len / (m - 1.0);

    constexpr double tiny = 1e-300;
    if (w < tiny) return b < tiny ? 1.0 : kInf;
    const double var_plus = (len - 1.0) / len * w + b / len;
    return std::sqrt(var_plus / w);
}

double ess(const std::vector<std::vector<double>>& chain_traces) {
    if (chain_traces.empty()) throw ArgumentError("ess needs at least one chain");
    std::size_t n = chain_traces[0].size();
    for (const auto& c : chain_traces) n = std::min(n, c.size());
    if (n < 4) throw ArgumentError("ess needs >= 4 draws per chain");
    const double m = static_cast<double>(chain_traces.size());
    const double total = m * static_cast<double>(n);

    std::vector<double> means, vars;
    double w = 0.0;
    for (const auto& c : chain_traces) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += c[i];
        mu /= static_cast<double>(n);
        means.push_back(mu);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (c[i] - mu) * (c[i] - mu);
        var /= static_cast<double>(n - 1);
        vars.push_back(var);
        w += var / m;
    }
    double b_over_n = 0.0;
    if (chain_traces.size() > 1) {
        double grand = 0.0;
        for (double mu : means) grand += mu / m;
        for (double mu : means) b_over_n += (mu - grand) * (mu - grand) / (m - 1.0);
    }
    const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b_over_n;
    if (var_plus < 1e-300) return total;

    auto acov = [&](std::size_t chain, std::size_t lag) {
        const auto& c = chain_traces[chain];
        const double mu = means[chain];
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (c[i] - mu) * (c[i + lag] - mu);
        return s / static_cast<double>(n);
    };

    // Geyer initial-positive-sequence sum over paired autocorrelations.
    double rho_sum = 0.0;
    double prev_pair = kInf;
    for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
        double rho_a = 0.0, rho_b = 0.0;
        for (std::size_t c = 0; c < chain_traces.size(); ++c) {
            rho_a += acov(c, lag) / m;
            rho_b += acov(c, lag + 1) / m;
        }
        rho_a = 1.0 - (w - rho_a) / var_plus;
        rho_b = 1.0 - (w - rho_b) / var_plus;
        double pair = rho_a + rho_b;
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);  // enforce monotone decrease
        prev_pair = pair;
        rho_sum += pair;
    }
    const double tau = 1.0 + 2.0 * rho_sum;
    return std::min(total, total / std::max(tau, 1e-12));
}

}  // namespace bammit
