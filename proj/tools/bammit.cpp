#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bammit/ammi.hpp"
#include "bammit/analysis.hpp"
#include "bammit/errors.hpp"
#include "bammit/io.hpp"
#include "bammit/sampler.hpp"
#include "bammit/simulate.hpp"
#include "bammit/viz.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bammit;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& options) {
    json manifest{{"tool", "bammit"},
                  {"version", kVersion},
                  {"draws_format_version", 1},
                  {"command", command},
                  {"options", options}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest.json in " + dir.string());
    out << manifest.dump(2) << "\n";
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string scenario = "i";
    std::size_t q_sim = 1;
    std::uint64_t seed = 1;
    std::string out_dir;
    double sigma_b = 1.0;
    double sigma = 1.0;
    std::string lambda_override;
};

int cmd_simulate(const SimulateArgs& args) {
    SimulationConfig config = scenario_preset(args.scenario);
    config.q_sim = args.q_sim;
    config.lambda_true = args.lambda_override.empty()
                             ? lambda_grid(args.q_sim)
                             : [&] {
                                   std::vector<double> l;
                                   for (const auto& s : split_list(args.lambda_override))
                                       l.push_back(std::stod(s));
                                   return l;
                               }();
    config.sigma_b_true = args.sigma_b;
    config.sigma_true = args.sigma;
    config.seed = args.seed;
    config.validate();

    fs::create_directories(args.out_dir);
    Rng rng(config.seed);
    Rng rng_params = rng.substream(1);
    Rng rng_train = rng.substream(2);
    Rng rng_test = rng.substream(3);

    FactorLayout layout = config.layout;
    layout.q = config.q_sim;
    ParameterState truth = simulate_parameters(config, rng_params);
    Dataset train = simulate_dataset(truth, layout, config.sigma_true, rng_train);
    Dataset test = simulate_dataset(truth, layout, config.sigma_true, rng_test);

    const fs::path dir(args.out_dir);
    write_dataset_csv(train, (dir / "train.csv").string());
    write_dataset_csv(test, (dir / "test.csv").string());
    write_truth_json(truth, config, (dir / "truth.json").string());
    write_manifest(dir, "simulate",
                   json{{"scenario", args.scenario},
                        {"q_sim", args.q_sim},
                        {"seed", args.seed},
                        {"sigma", args.sigma},
                        {"sigma_b", args.sigma_b}});
    std::cout << "wrote train.csv (" << train.records.size() << " rows), test.csv, truth.json to "
              << args.out_dir << "\n";
    return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    std::string model = "bammit";
    std::string data_path;
    std::string factors;
    std::string response = "y";
    std::size_t q = 1;
    std::string ar_time;
    int chains = 3, iter = 4000, burn = 2000, thin = 2;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string split_by;
    std::string test_levels;
    double mu_mean = std::numeric_limits<double>::quiet_NaN();
    double mu_var = std::numeric_limits<double>::quiet_NaN();
    double a0 = 0.1, a1 = 0.1, a2 = 1.0, a3 = 1.0;
};

json ammi_fit_to_json(const AmmiFit& fit, const FactorLayout& layout) {
    return json{{"format", "bammit-ammi"},
                {"version", 1},
                {"row_factor", layout.factor_names[0]},
                {"col_factor", layout.factor_names[1]},
                {"row_levels", layout.level_names[0]},
                {"col_levels", layout.level_names[1]},
                {"fit",
                 {{"grand_mean", fit.grand_mean},
                  {"row_effects", fit.row_effects},
                  {"col_effects", fit.col_effects},
                  {"lambda", fit.lambda},
                  {"row_scores", fit.row_scores},
                  {"col_scores", fit.col_scores}}}};
}

int cmd_fit(const FitArgs& args) {
    CsvTable table = parse_csv(args.data_path);
    std::vector<std::string> factor_cols = split_list(args.factors);
    if (factor_cols.size() < 2) throw ArgumentError("need at least 2 factor columns");

    // Optional train/test split: hold out named levels of one column.
    if (!args.split_by.empty()) {
        if (args.test_levels.empty())
            throw ArgumentError("--split-by requires --test-levels");
        const std::size_t col = table.column(args.split_by);
        const auto holds = split_list(args.test_levels);
        const std::set<std::string> held(holds.begin(), holds.end());
        CsvTable train = table;
        train.rows.clear();
        for (auto& row : table.rows)
            if (!held.count(row[col])) train.rows.push_back(row);
        if (train.rows.empty()) throw EmptyData("split left no training rows");
        table = std::move(train);
    }

    Dataset data = dataset_from_table(table, factor_cols, args.response);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    json options{{"model", args.model},       {"data", args.data_path},
                 {"factors", factor_cols},    {"response", args.response},
                 {"q", args.q},               {"seed", args.seed},
                 {"chains", args.chains},     {"iter", args.iter},
                 {"burn", args.burn},         {"thin", args.thin},
                 {"split_by", args.split_by}, {"test_levels", args.test_levels}};

    if (args.model == "ammi") {
        if (data.layout.n_factors() != 2)
            throw ArgumentError("--model ammi needs exactly 2 factor columns");
        // Average replicates into a two-way table of cell means.
        const std::size_t b1 = data.layout.dims[0], b2 = data.layout.dims[1];
        std::vector<std::vector<double>> sum(b1, std::vector<double>(b2, 0.0));
        std::vector<std::vector<int>> count(b1, std::vector<int>(b2, 0));
        for (const auto& rec : data.records) {
            sum[rec.cell[0]][rec.cell[1]] += rec.y;
            count[rec.cell[0]][rec.cell[1]]++;
        }
        for (std::size_t i = 0; i < b1; ++i)
            for (std::size_t j = 0; j < b2; ++j) {
                if (count[i][j] == 0)
                    throw IncompleteTable("cell (" + data.layout.level_names[0][i] + ", " +
                                          data.layout.level_names[1][j] +
                                          ") has no observations");
                sum[i][j] /= count[i][j];
            }
        AmmiFit fit = fit_ammi_classical(sum, args.q);
        std::ofstream out(dir / "ammi.json", std::ios::binary);
        if (!out) throw IoError("cannot write ammi.json");
        out << ammi_fit_to_json(fit, data.layout).dump(2) << "\n";
        write_manifest(dir, "fit", options);
        std::cout << "wrote ammi.json to " << args.out_dir << "\n";
        return 0;
    }

    PriorConfig priors;
    {
        double mean = 0.0;
        for (const auto& rec : data.records) mean += rec.y;
        mean /= static_cast<double>(data.records.size());
        double var = 0.0;
        for (const auto& rec : data.records) var += (rec.y - mean) * (rec.y - mean);
        var = data.records.size() > 1 ? var / (data.records.size() - 1.0) : 1.0;
        priors.mu_mean = std::isnan(args.mu_mean) ? mean : args.mu_mean;
        priors.mu_var = std::isnan(args.mu_var) ? std::max(var, 1e-6) : args.mu_var;
    }
    priors.a0 = args.a0;
    priors.a1 = args.a1;
    priors.a2 = args.a2;
    priors.a3 = args.a3;

    McmcConfig mcmc;
    mcmc.n_chains = args.chains;
    mcmc.n_iter = args.iter;
    mcmc.n_burn = args.burn;
    mcmc.thin = args.thin;
    mcmc.adapt_window = args.burn;
    mcmc.q = args.q;
    mcmc.seed = args.seed;

    std::optional<ArConfig> ar;
    if (args.model == "ar-bammit") {
        std::string time_name = args.ar_time.empty() ? "year" : args.ar_time;
        auto it = std::find(factor_cols.begin(), factor_cols.end(), time_name);
        if (it == factor_cols.end())
            throw ArgumentError("AR time factor '" + time_name + "' is not a fitted factor");
        ArConfig cfg;
        cfg.time_factor = static_cast<std::size_t>(it - factor_cols.begin());
        ar = cfg;
    } else if (args.model != "bammit") {
        throw ArgumentError("unknown model '" + args.model + "'");
    }

    auto progress = [](int chain, int iter, int total) {
        if (chain == 0)
            std::cerr << "chain 1: iteration " << iter << "/" << total << "\n";
    };
    PosteriorDraws draws = run_chains(data, priors, mcmc, ar, progress, 1000);
    write_draws(draws, (dir / "draws.ndjson").string());
    write_manifest(dir, "fit", options);
    std::cout << "wrote draws.ndjson (" << draws.n_draws_total() << " draws) to "
              << args.out_dir << "\n";
    for (const auto& d : draws.diagnostics)
        if (d.name == "mu" || d.name.rfind("lambda", 0) == 0 || d.name == "sigma")
            std::cout << "  " << d.name << ": rhat=" << d.rhat << " ess=" << d.ess << "\n";
    return 0;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
    std::string draws_path;
    std::string cells = "all";
    bool include_noise = false;
    std::string out_path;
    std::uint64_t seed = 1;
};

int cmd_predict(const PredictArgs& args) {
    PosteriorDraws draws = read_draws(args.draws_path);
    std::vector<Cell> cells;
    if (args.cells == "all") {
        const std::size_t n = draws.layout.grid_size();
        cells.reserve(n);
        for (std::size_t i = 0; i < n; ++i) cells.push_back(unflatten_index(draws.layout, i));
    } else {
        CsvTable table = parse_csv(args.cells);
        for (const auto& row : table.rows) {
            std::vector<std::string> names;
            for (const auto& f : draws.layout.factor_names)
                names.push_back(row[table.column(f)]);
            cells.push_back(cell_from_names(draws.layout, names));
        }
    }
    Rng rng(args.seed);
    auto preds = predict_cells(draws, cells, args.include_noise, rng);

    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + args.out_path);
    for (const auto& f : draws.layout.factor_names) out << f << ",";
    out << "mean,median,sd,q05,q95\n";
    for (const auto& p : preds) {
        for (std::size_t v = 0; v < p.cell.size(); ++v)
            out << draws.layout.level_names[v][p.cell[v]] << ",";
        out << format_double(p.mean) << "," << format_double(p.median) << ","
            << format_double(p.sd) << "," << format_double(p.q05) << ","
            << format_double(p.q95) << "\n";
    }
    std::cout << "wrote " << preds.size() << " predictions to " << args.out_path << "\n";
    return 0;
}

// ---- summarize ------------------------------------------------------------

struct SummarizeArgs {
    std::string draws_path;
    std::string what = "mu";
    std::string out_path;
};

int cmd_summarize(const SummarizeArgs& args) {
    PosteriorDraws draws = read_draws(args.draws_path);
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + args.out_path);
    if (args.what == "diagnostics") {
        out << "name,rhat,ess\n";
        for (const auto& d : draws.diagnostics)
            out << d.name << "," << format_double(d.rhat) << "," << format_double(d.ess)
                << "\n";
    } else {
        out << "name,mean,sd,q05,q50,q95\n";
        for (const auto& s : summarize(draws, args.what))
            out << s.name << "," << format_double(s.stats.mean) << ","
                << format_double(s.stats.sd) << "," << format_double(s.stats.q05) << ","
                << format_double(s.stats.q50) << "," << format_double(s.stats.q95) << "\n";
    }
    std::cout << "wrote summary to " << args.out_path << "\n";
    return 0;
}

// ---- plot -----------------------------------------------------------------

struct PlotArgs {
    std::string draws_path;
    std::string kind = "heatmap";
    std::string fix;
    std::string row_factor, col_factor, factor;
    std::string truth_path;
    std::string out_path;
    int levels = 4;
};

Cell parse_fixed(const FactorLayout& layout, const std::string& fix) {
    Cell fixed(layout.n_factors(), 0);
    if (fix.empty()) return fixed;
    for (const auto& assign : split_list(fix)) {
        const auto eq = assign.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("--fix expects name=level pairs, got '" + assign + "'");
        const std::string fname = assign.substr(0, eq);
        const std::string lname = assign.substr(eq + 1);
        const auto fit = std::find(layout.factor_names.begin(), layout.factor_names.end(), fname);
        if (fit == layout.factor_names.end())
            throw ArgumentError("unknown factor '" + fname + "' in --fix");
        const std::size_t v = static_cast<std::size_t>(fit - layout.factor_names.begin());
        const auto& levels = layout.level_names[v];
        const auto lit = std::find(levels.begin(), levels.end(), lname);
        if (lit == levels.end())
            throw ArgumentError("unknown level '" + lname + "' for factor " + fname);
        fixed[v] = static_cast<std::size_t>(lit - levels.begin());
    }
    return fixed;
}

std::size_t factor_index(const FactorLayout& layout, const std::string& name,
                         std::size_t fallback) {
    if (name.empty()) return fallback;
    const auto it = std::find(layout.factor_names.begin(), layout.factor_names.end(), name);
    if (it == layout.factor_names.end()) throw ArgumentError("unknown factor '" + name + "'");
    return static_cast<std::size_t>(it - layout.factor_names.begin());
}

int cmd_plot(const PlotArgs& args) {
    PosteriorDraws draws = read_draws(args.draws_path);
    const auto& layout = draws.layout;

    if (args.kind == "heatmap") {
        const std::size_t v1 = factor_index(layout, args.row_factor, 0);
        const std::size_t v2 = factor_index(layout, args.col_factor, 1);
        if (v1 == v2) throw ArgumentError("row and column factors must differ");
        Cell fixed = parse_fixed(layout, args.fix);

        SummaryGrid grid;
        grid.row_labels = layout.level_names[v1];
        grid.col_labels = layout.level_names[v2];
        std::vector<Cell> cells;
        for (std::size_t i = 0; i < layout.dims[v1]; ++i)
            for (std::size_t j = 0; j < layout.dims[v2]; ++j) {
                Cell c = fixed;
                c[v1] = i;
                c[v2] = j;
                cells.push_back(std::move(c));
            }
        Rng rng(0);
        auto preds = predict_cells(draws, cells, false, rng);
        grid.cells.resize(layout.dims[v1]);
        std::size_t k = 0;
        for (std::size_t i = 0; i < layout.dims[v1]; ++i)
            for (std::size_t j = 0; j < layout.dims[v2]; ++j)
                grid.cells[i].push_back(preds[k++]);
        VsupPalette palette = palette_for_grid(grid, args.levels);
        emit_heatmap_svg(grid, palette, "Predicted " + std::string("response"), args.out_path);
    } else if (args.kind == "by-level") {
        const std::size_t v = factor_index(layout, args.factor, layout.n_factors() - 1);
        emit_level_summary(draws, v, args.out_path);
    } else if (args.kind == "truth-scatter") {
        if (args.truth_path.empty()) throw ArgumentError("truth-scatter needs --truth");
        ParameterState truth = read_truth_json(args.truth_path);
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + args.out_path);
        out << "what,index,truth,median,q05,q95\n";
        // Main effects.
        for (std::size_t v = 0; v < layout.n_factors(); ++v) {
            auto summaries = summarize(draws, "b[" + std::to_string(v + 1) + "]");
            for (std::size_t i = 0; i < layout.dims[v]; ++i) {
                const auto& s = summaries[i].stats;
                out << "b[" << v + 1 << "]," << i + 1 << ","
                    << format_double(truth.main_effects[v][i]) << ","
                    << format_double(s.q50) << "," << format_double(s.q05) << ","
                    << format_double(s.q95) << "\n";
            }
        }
        // Interaction term per grid cell (posterior mean only; cheap and
        // enough for the scatter).
        auto est = posterior_mean_interaction(draws);
        for (std::size_t idx = 0; idx < est.size(); ++idx) {
            Cell cell = unflatten_index(layout, idx);
            double t = 0.0;
            for (std::size_t q = 0; q < truth.lambda.size(); ++q) {
                double prod = truth.lambda[q];
                for (std::size_t v = 0; v < cell.size(); ++v)
                    prod *= truth.beta[v][q][cell[v]];
                t += prod;
            }
            out << "interaction," << idx << "," << format_double(t) << ","
                << format_double(est[idx]) << ",,\n";
        }
    } else {
        throw ArgumentError("unknown plot kind '" + args.kind + "'");
    }
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

// ---- compare --------------------------------------------------------------

struct CompareArgs {
    std::string test_path;
    std::string factors;
    std::string response = "y";
    std::string fits;
    std::string out_path;
};

int cmd_compare(const CompareArgs& args) {
    CsvTable table = parse_csv(args.test_path);
    const std::vector<std::string> factor_cols = split_list(args.factors);
    const std::size_t resp_idx = table.column(args.response);
    std::vector<std::size_t> factor_idx;
    for (const auto& f : factor_cols) factor_idx.push_back(table.column(f));

    std::vector<double> y;
    for (const auto& row : table.rows) y.push_back(std::stod(row[resp_idx]));

    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + args.out_path);
    out << "model,rmse,r2\n";

    for (const auto& fit_path : split_list(args.fits)) {
        std::ifstream probe(fit_path);
        if (!probe) throw IoError("cannot open " + fit_path);
        std::string first_line;
        std::getline(probe, first_line);
        probe.close();

        std::vector<double> yhat;
        std::string label;
        if (first_line.find("bammit-draws") != std::string::npos) {
            PosteriorDraws draws = read_draws(fit_path);
            label = draws.ar ? "ar-bammit" : "bammit";
            // Posterior medians per unique cell, then mapped onto the rows.
            std::map<Cell, double> cache;
            Rng rng(0);
            for (const auto& row : table.rows) {
                std::vector<std::string> names;
                for (std::size_t v = 0; v < factor_cols.size(); ++v)
                    names.push_back(row[factor_idx[v]]);
                Cell cell = cell_from_names(draws.layout, names);
                auto it = cache.find(cell);
                if (it == cache.end()) {
                    auto p = predict_cells(draws, {cell}, false, rng);
                    it = cache.emplace(cell, p[0].median).first;
                }
                yhat.push_back(it->second);
            }
        } else {
            json j;
            std::ifstream in(fit_path);
            in >> j;
            if (!j.contains("format") || j["format"] != "bammit-ammi")
                throw VersionMismatch(fit_path + " is not a recognized fit file");
            label = "ammi";
            AmmiFit fit;
            const auto& f = j.at("fit");
            fit.grand_mean = f.at("grand_mean").get<double>();
            fit.row_effects = f.at("row_effects").get<std::vector<double>>();
            fit.col_effects = f.at("col_effects").get<std::vector<double>>();
            fit.lambda = f.at("lambda").get<std::vector<double>>();
            fit.row_scores = f.at("row_scores").get<std::vector<std::vector<double>>>();
            fit.col_scores = f.at("col_scores").get<std::vector<std::vector<double>>>();
            const auto row_levels = j.at("row_levels").get<std::vector<std::string>>();
            const auto col_levels = j.at("col_levels").get<std::vector<std::string>>();
            const std::size_t ri = table.column(j.at("row_factor").get<std::string>());
            const std::size_t ci = table.column(j.at("col_factor").get<std::string>());
            for (const auto& row : table.rows) {
                const auto r = std::find(row_levels.begin(), row_levels.end(), row[ri]);
                const auto c = std::find(col_levels.begin(), col_levels.end(), row[ci]);
                if (r == row_levels.end() || c == col_levels.end())
                    throw ArgumentError("test row has a level unseen by the AMMI fit");
                yhat.push_back(predict_ammi(fit, r - row_levels.begin(), c - col_levels.begin()));
            }
        }
        out << label << "," << format_double(rmse(y, yhat)) << ","
            << format_double(r_squared(y, yhat)) << "\n";
    }
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BAMMIT: Bayesian additive main effects and multiplicative interaction "
                 "tensor models for multi-environment trials"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate synthetic train/test data");
    c_sim->add_option("--scenario", sim.scenario, "Scenario id: i, ii, iii or iv");
    c_sim->add_option("--q-sim", sim.q_sim, "True number of multiplicative components");
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
    c_sim->add_option("--sigma", sim.sigma, "Residual SD");
    c_sim->add_option("--sigma-b", sim.sigma_b, "Main-effect SD");
    c_sim->add_option("--lambda", sim.lambda_override, "Comma list overriding lambda");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit a model to a CSV dataset");
    c_fit->add_option("--model", fit.model, "bammit, ar-bammit or ammi");
    c_fit->add_option("--data", fit.data_path, "Input CSV")->required();
    c_fit->add_option("--factors", fit.factors, "Comma list of factor columns")->required();
    c_fit->add_option("--response", fit.response, "Response column");
    c_fit->add_option("--q", fit.q, "Number of multiplicative components");
    c_fit->add_option("--ar-time", fit.ar_time, "Time factor for ar-bammit (default: year)");
    c_fit->add_option("--chains", fit.chains, "Number of chains");
    c_fit->add_option("--iter", fit.iter, "Iterations per chain");
    c_fit->add_option("--burn", fit.burn, "Burn-in iterations");
    c_fit->add_option("--thin", fit.thin, "Thinning rate");
    c_fit->add_option("--seed", fit.seed, "RNG seed");
    c_fit->add_option("--out", fit.out_dir, "Output directory")->required();
    c_fit->add_option("--split-by", fit.split_by, "Hold out levels of this column");
    c_fit->add_option("--test-levels", fit.test_levels, "Comma list of held-out levels");
    c_fit->add_option("--mu-mean", fit.mu_mean, "Prior mean of mu (default: data mean)");
    c_fit->add_option("--mu-var", fit.mu_var, "Prior variance of mu (default: data variance)");
    c_fit->add_option("--a0", fit.a0, "Gamma shape for residual precision");
    c_fit->add_option("--a1", fit.a1, "Gamma rate for residual precision");
    c_fit->add_option("--a2", fit.a2, "Half-t scale for main-effect SDs");
    c_fit->add_option("--a3", fit.a3, "Half-t scale for lambda SD");

    PredictArgs pred;
    auto* c_pred = app.add_subcommand("predict", "Posterior predictions per cell");
    c_pred->add_option("--draws", pred.draws_path, "Draws file")->required();
    c_pred->add_option("--cells", pred.cells, "'all' or a CSV of cells");
    c_pred->add_flag("--include-noise", pred.include_noise, "Add predictive noise");
    c_pred->add_option("--seed", pred.seed, "RNG seed for predictive noise");
    c_pred->add_option("--out", pred.out_path, "Output CSV")->required();

    SummarizeArgs summ;
    auto* c_summ = app.add_subcommand("summarize", "Posterior summaries");
    c_summ->add_option("--draws", summ.draws_path, "Draws file")->required();
    c_summ->add_option("--what", summ.what, "mu|sigma|b|lambda|beta|diagnostics");
    c_summ->add_option("--out", summ.out_path, "Output CSV")->required();

    PlotArgs plot;
    auto* c_plot = app.add_subcommand("plot", "Emit heatmap/by-level/scatter artifacts");
    c_plot->add_option("--draws", plot.draws_path, "Draws file")->required();
    c_plot->add_option("--kind", plot.kind, "heatmap|by-level|truth-scatter");
    c_plot->add_option("--fix", plot.fix, "Fixed levels, e.g. year=2015,block=3");
    c_plot->add_option("--row-factor", plot.row_factor, "Heatmap row factor");
    c_plot->add_option("--col-factor", plot.col_factor, "Heatmap column factor");
    c_plot->add_option("--factor", plot.factor, "Factor for by-level");
    c_plot->add_option("--truth", plot.truth_path, "truth.json for truth-scatter");
    c_plot->add_option("--levels", plot.levels, "Uncertainty levels in the palette");
    c_plot->add_option("--out", plot.out_path, "Output file")->required();

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "RMSE/R2 table for fits on test data");
    c_cmp->add_option("--test", cmp.test_path, "Test CSV with observed responses")->required();
    c_cmp->add_option("--truth", cmp.test_path, "Alias for --test");
    c_cmp->add_option("--factors", cmp.factors, "Comma list of factor columns")->required();
    c_cmp->add_option("--response", cmp.response, "Response column");
    c_cmp->add_option("--fits", cmp.fits, "Comma list of fit files")->required();
    c_cmp->add_option("--out", cmp.out_path, "Output CSV")->required();

    try {
        app.parse(argc, argv);
        if (*c_sim) return cmd_simulate(sim);
        if (*c_fit) return cmd_fit(fit);
        if (*c_pred) return cmd_predict(pred);
        if (*c_summ) return cmd_summarize(summ);
        if (*c_plot) return cmd_plot(plot);
        if (*c_cmp) return cmd_compare(cmp);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NonFiniteState& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const VersionMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
