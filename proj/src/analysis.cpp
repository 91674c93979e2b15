#include "bammit/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "bammit/errors.hpp"

namespace bammit {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw ArgumentError("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize_scalar(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("summarize_scalar on empty sample");
    SummaryStats s;
    const double n = static_cast<double>(values.size());
    for (double x : values) s.mean += x;
    s.mean /= n;
    double ss = 0.0;
    for (double x : values) ss += (x - s.mean) * (x - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    s.q05 = quantile_sorted(values, 0.05);
    s.q50 = quantile_sorted(values, 0.50);
    s.q95 = quantile_sorted(values, 0.95);
    return s;
}

namespace {

template <typename Extract>
std::vector<double> pooled_values(const PosteriorDraws& draws, Extract extract) {
    std::vector<double> values;
    values.reserve(draws.n_draws_total());
    for (const auto& chain : draws.chains)
        for (const auto& state : chain) values.push_back(extract(state));
    return values;
}

}  // namespace

std::vector<NamedSummary> summarize(const PosteriorDraws& draws, const std::string& selector) {
    if (draws.n_draws_total() == 0) throw ArgumentError("no draws to summarize");
    std::vector<NamedSummary> out;
    auto add = [&](const std::string& name, auto extract) {
        out.push_back({name, summarize_scalar(pooled_values(draws, extract))});
    };

    const auto& layout = draws.layout;
    if (selector == "mu") {
        add("mu", [](const ParameterState& s) { return s.mu; });
    } else if (selector == "sigma") {
        add("sigma", [](const ParameterState& s) { return std::sqrt(s.sigma2_y); });
    } else if (selector == "lambda") {
        for (std::size_t q = 0; q < layout.q; ++q)
            add("lambda[" + std::to_string(q + 1) + "]",
                [q](const ParameterState& s) { return s.lambda[q]; });
    } else if (selector == "b" || selector.rfind("b[", 0) == 0) {
        std::size_t v_lo = 0, v_hi = layout.n_factors();
        if (selector != "b") {
            v_lo = std::stoul(selector.substr(2)) - 1;
            if (v_lo >= layout.n_factors()) throw ArgumentError("bad factor in " + selector);
            v_hi = v_lo + 1;
        }
        for (std::size_t v = v_lo; v < v_hi; ++v)
            for (std::size_t i = 0; i < layout.dims[v]; ++i)
                add("b[" + std::to_string(v + 1) + "][" + std::to_string(i + 1) + "]",
                    [v, i](const ParameterState& s) { return s.main_effects[v][i]; });
    } else if (selector == "beta" || selector.rfind("beta[", 0) == 0) {
        std::size_t v_lo = 0, v_hi = layout.n_factors();
        if (selector != "beta") {
            v_lo = std::stoul(selector.substr(5)) - 1;
            if (v_lo >= layout.n_factors()) throw ArgumentError("bad factor in " + selector);
            v_hi = v_lo + 1;
        }
        for (std::size_t v = v_lo; v < v_hi; ++v)
            for (std::size_t q = 0; q < layout.q; ++q)
                for (std::size_t i = 0; i < layout.dims[v]; ++i)
                    add("beta[" + std::to_string(v + 1) + "][" + std::to_string(i + 1) + "][" +
                            std::to_string(q + 1) + "]",
                        [v, q, i](const ParameterState& s) { return s.beta[v][q][i]; });
    } else {
        throw ArgumentError("unknown selector '" + selector + "'");
    }
    return out;
}

std::vector<PredictionSummary> predict_cells(const PosteriorDraws& draws,
                                             const std::vector<Cell>& cells,
                                             bool include_noise, Rng& rng) {
    if (draws.n_draws_total() == 0) throw ArgumentError("no draws to predict from");
    std::vector<PredictionSummary> out;
    out.reserve(cells.size());
    std::vector<double> values;
    values.reserve(draws.n_draws_total());
    for (const auto& cell : cells) {
        values.clear();
        for (const auto& chain : draws.chains) {
            for (const auto& state : chain) {
                double y = linear_predictor(state, draws.layout, cell);
                if (include_noise) y += rng.normal(0.0, std::sqrt(state.sigma2_y));
                values.push_back(y);
            }
        }
        const SummaryStats s = summarize_scalar(values);
        PredictionSummary p;
        p.cell = cell;
        p.mean = s.mean;
        p.median = s.q50;
        p.sd = s.sd;
        p.q05 = s.q05;
        p.q95 = s.q95;
        out.push_back(std::move(p));
    }
    return out;
}

double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size())
        throw ArgumentError("rmse needs equal nonzero-length vectors");
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(ss / static_cast<double>(y.size()));
}

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size())
        throw ArgumentError("r_squared needs equal nonzero-length vectors");
    double mean = 0.0;
    for (double x : y) mean += x;
    mean /= static_cast<double>(y.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (sst == 0.0) throw ArgumentError("r_squared undefined for zero-variance y");
    return 1.0 - sse / sst;
}

std::vector<InteractionCellSummary> interaction_effect(const PosteriorDraws& draws,
                                                       std::size_t v1, std::size_t v2,
                                                       const Cell& fixed) {
    const auto& layout = draws.layout;
    const std::size_t V = layout.n_factors();
    if (v1 >= V || v2 >= V || v1 == v2) throw ArgumentError("invalid factor pair");
    if (fixed.size() != V)
        throw ArgumentError("fixed assignment must name a level for every factor");
    for (std::size_t v = 0; v < V; ++v)
        if (v != v1 && v != v2 && fixed[v] >= layout.dims[v])
            throw ArgumentError("fixed level out of range for factor " + std::to_string(v + 1));

    std::vector<InteractionCellSummary> out;
    std::vector<double> with_main, inter;
    Cell cell = fixed;
    for (std::size_t i = 0; i < layout.dims[v1]; ++i) {
        for (std::size_t j = 0; j < layout.dims[v2]; ++j) {
            cell[v1] = i;
            cell[v2] = j;
            with_main.clear();
            inter.clear();
            for (const auto& chain : draws.chains) {
                for (const auto& state : chain) {
                    double term = 0.0;
                    for (std::size_t q = 0; q < state.lambda.size(); ++q) {
                        double prod = state.lambda[q];
                        for (std::size_t v = 0; v < V; ++v) prod *= state.beta[v][q][cell[v]];
                        term += prod;
                    }
                    inter.push_back(term);
                    with_main.push_back(term + state.main_effects[v1][i]);
                }
            }
            InteractionCellSummary s;
            s.i = i;
            s.j = j;
            s.with_main = summarize_scalar(with_main);
            s.interaction = summarize_scalar(inter);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<double> posterior_mean_interaction(const PosteriorDraws& draws) {
    const auto& layout = draws.layout;
    const std::size_t n = layout.grid_size();
    std::vector<double> mean(n, 0.0);
    const double total = static_cast<double>(draws.n_draws_total());
    if (total == 0.0) throw ArgumentError("no draws");
    for (const auto& chain : draws.chains) {
        for (const auto& state : chain) {
            std::vector<std::size_t> cell(layout.n_factors(), 0);
            for (std::size_t idx = 0; idx < n; ++idx) {
                double term = 0.0;
                for (std::size_t q = 0; q < state.lambda.size(); ++q) {
                    double prod = state.lambda[q];
                    for (std::size_t v = 0; v < cell.size(); ++v)
                        prod *= state.beta[v][q][cell[v]];
                    term += prod;
                }
                mean[idx] += term / total;
                for (std::size_t v = cell.size(); v-- > 0;) {
                    if (++cell[v] < layout.dims[v]) break;
                    cell[v] = 0;
                }
            }
        }
    }
    return mean;
}

}  // namespace bammit
