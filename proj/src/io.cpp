#include "bammit/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "bammit/errors.hpp"
#include "json.hpp"

namespace bammit {

using nlohmann::json;

namespace {

constexpr int kDrawsFormatVersion = 1;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

// JSON cannot carry non-finite doubles; encode them as strings.
json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

json layout_to_json(const FactorLayout& layout) {
    return json{{"dims", layout.dims},
                {"q", layout.q},
                {"level_names", layout.level_names},
                {"factor_names", layout.factor_names}};
}

FactorLayout layout_from_json(const json& j) {
    FactorLayout layout;
    layout.dims = j.at("dims").get<std::vector<std::size_t>>();
    layout.q = j.at("q").get<std::size_t>();
    layout.level_names = j.at("level_names").get<std::vector<std::vector<std::string>>>();
    layout.factor_names = j.at("factor_names").get<std::vector<std::string>>();
    return layout;
}

json state_to_json(const ParameterState& s) {
    json j{{"mu", s.mu},
           {"b", s.main_effects},
           {"sigma_b", s.sigma_b},
           {"lambda", s.lambda},
           {"sigma_lambda", s.sigma_lambda},
           {"theta", s.theta},
           {"sigma2", s.sigma2_y}};
    if (s.ar) {
        j["ar"] = json{{"time_factor", s.ar->time_factor},
                       {"phi_b", s.ar->phi_b},
                       {"phi_theta", s.ar->phi_theta},
                       {"alpha_b", s.ar->alpha_b},
                       {"alpha_theta", s.ar->alpha_theta},
                       {"sigma_eta", s.ar->sigma_eta},
                       {"sigma_omega", s.ar->sigma_omega}};
    }
    return j;
}

ParameterState state_from_json(const json& j) {
    ParameterState s;
    s.mu = j.at("mu").get<double>();
    s.main_effects = j.at("b").get<std::vector<std::vector<double>>>();
    s.sigma_b = j.at("sigma_b").get<std::vector<double>>();
    s.lambda = j.at("lambda").get<std::vector<double>>();
    s.sigma_lambda = j.at("sigma_lambda").get<double>();
    s.theta = j.at("theta").get<std::vector<std::vector<std::vector<double>>>>();
    s.sigma2_y = j.at("sigma2").get<double>();
    s.beta = s.theta;
    s.recompute_beta();
    if (j.contains("ar")) {
        ArParams ap;
        const auto& a = j.at("ar");
        ap.time_factor = a.at("time_factor").get<std::size_t>();
        ap.phi_b = a.at("phi_b").get<double>();
        ap.phi_theta = a.at("phi_theta").get<double>();
        ap.alpha_b = a.at("alpha_b").get<double>();
        ap.alpha_theta = a.at("alpha_theta").get<double>();
        ap.sigma_eta = a.at("sigma_eta").get<double>();
        ap.sigma_omega = a.at("sigma_omega").get<double>();
        s.ar = ap;
    }
    return s;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw MissingColumn("column '" + name + "' not found");
}

CsvTable parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile(path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
    }
    if (table.rows.empty()) throw EmptyFile(path + " has no data rows");
    return table;
}

Dataset dataset_from_table(const CsvTable& table,
                           const std::vector<std::string>& factor_columns,
                           const std::string& response_column) {
    std::vector<std::size_t> factor_idx;
    for (const auto& name : factor_columns) factor_idx.push_back(table.column(name));
    const std::size_t resp_idx = table.column(response_column);
    const std::size_t V = factor_columns.size();

    Dataset data;
    data.response_name = response_column;
    data.layout.factor_names = factor_columns;
    data.layout.level_names.resize(V);
    std::vector<std::map<std::string, std::size_t>> level_index(V);

    std::vector<std::size_t> bad_rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::size_t width = resp_idx;
        for (std::size_t i : factor_idx) width = std::max(width, i);
        if (row.size() <= width) {
            bad_rows.push_back(r + 2);  // 1-based, counting the header
            continue;
        }
        Cell cell(V);
        for (std::size_t v = 0; v < V; ++v) {
            const std::string& name = row[factor_idx[v]];
            auto [it, inserted] = level_index[v].try_emplace(name, level_index[v].size());
            if (inserted) data.layout.level_names[v].push_back(name);
            cell[v] = it->second;
        }
        double y;
        try {
            std::size_t consumed = 0;
            y = std::stod(row[resp_idx], &consumed);
            if (consumed != row[resp_idx].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            bad_rows.push_back(r + 2);
            continue;
        }
        data.records.push_back({std::move(cell), y});
    }
    if (!bad_rows.empty()) {
        std::string msg = "unparseable response in rows:";
        for (std::size_t r : bad_rows) msg += " " + std::to_string(r);
        throw ParseError(bad_rows.front(), msg);
    }

    data.layout.dims.resize(V);
    for (std::size_t v = 0; v < V; ++v) data.layout.dims[v] = data.layout.level_names[v].size();
    data.layout.q = 1;
    data.layout.validate();
    return data;
}

Dataset parse_dataset_csv(const std::string& path,
                          const std::vector<std::string>& factor_columns,
                          const std::string& response_column) {
    return dataset_from_table(parse_csv(path), factor_columns, response_column);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t v = 0; v < data.layout.n_factors(); ++v)
        out << data.layout.factor_names[v] << ",";
    out << data.response_name << "\n";
    char buf[64];
    for (const auto& rec : data.records) {
        for (std::size_t v = 0; v < rec.cell.size(); ++v)
            out << data.layout.level_names[v][rec.cell[v]] << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", rec.y);
        out << buf << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

Cell cell_from_names(const FactorLayout& layout, const std::vector<std::string>& names) {
    if (names.size() != layout.n_factors())
        throw ArgumentError("expected one level name per factor");
    Cell cell(names.size());
    for (std::size_t v = 0; v < names.size(); ++v) {
        const auto& levels = layout.level_names[v];
        bool found = false;
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == names[v]) {
                cell[v] = i;
                found = true;
                break;
            }
        if (!found)
            throw ArgumentError("unknown level '" + names[v] + "' for factor " +
                                layout.factor_names[v]);
    }
    return cell;
}

void write_draws(const PosteriorDraws& draws, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    json header{{"format", "bammit-draws"},
                {"version", kDrawsFormatVersion},
                {"layout", layout_to_json(draws.layout)},
                {"config",
                 {{"n_chains", draws.config.n_chains},
                  {"n_iter", draws.config.n_iter},
                  {"n_burn", draws.config.n_burn},
                  {"thin", draws.config.thin},
                  {"q", draws.config.q},
                  {"seed", draws.config.seed},
                  {"adapt_window", draws.config.adapt_window},
                  {"target_accept", draws.config.target_accept},
                  {"target_accept_scalar", draws.config.target_accept_scalar}}}};
    if (draws.ar)
        header["ar"] = json{{"time_factor", draws.ar->time_factor},
                            {"alpha_prior_var", draws.ar->alpha_prior_var},
                            {"innovation_scale", draws.ar->innovation_scale}};
    json acc = json::object();
    for (const auto& [k, v] : draws.acceptance_rates) acc[k] = num(v);
    header["acceptance_rates"] = acc;
    json diags = json::array();
    for (const auto& d : draws.diagnostics)
        diags.push_back(json{{"name", d.name}, {"rhat", num(d.rhat)}, {"ess", num(d.ess)}});
    header["diagnostics"] = diags;
    std::vector<std::size_t> per_chain;
    for (const auto& c : draws.chains) per_chain.push_back(c.size());
    header["draws_per_chain"] = per_chain;

    out << header.dump() << "\n";
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        for (const auto& state : draws.chains[c]) {
            json rec = state_to_json(state);
            rec["chain"] = c;
            out << rec.dump() << "\n";
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

PosteriorDraws read_draws(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw CorruptRecord(1, "missing metadata record");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw CorruptRecord(1, std::string("bad metadata record: ") + e.what());
    }
    if (!header.contains("format") || header["format"] != "bammit-draws" ||
        !header.contains("version"))
        throw VersionMismatch("not a bammit draws file");
    if (header["version"].get<int>() != kDrawsFormatVersion)
        throw VersionMismatch("unsupported draws format version " +
                              header["version"].dump());

    PosteriorDraws draws;
    try {
        draws.layout = layout_from_json(header.at("layout"));
        const auto& cfg = header.at("config");
        draws.config.n_chains = cfg.at("n_chains").get<int>();
        draws.config.n_iter = cfg.at("n_iter").get<int>();
        draws.config.n_burn = cfg.at("n_burn").get<int>();
        draws.config.thin = cfg.at("thin").get<int>();
        draws.config.q = cfg.at("q").get<std::size_t>();
        draws.config.seed = cfg.at("seed").get<std::uint64_t>();
        draws.config.adapt_window = cfg.at("adapt_window").get<int>();
        draws.config.target_accept = cfg.at("target_accept").get<double>();
        draws.config.target_accept_scalar = cfg.at("target_accept_scalar").get<double>();
        if (header.contains("ar")) {
            ArConfig ar;
            ar.time_factor = header["ar"].at("time_factor").get<std::size_t>();
            ar.alpha_prior_var = header["ar"].at("alpha_prior_var").get<double>();
            ar.innovation_scale = header["ar"].at("innovation_scale").get<double>();
            draws.ar = ar;
        }
        for (const auto& [k, v] : header.at("acceptance_rates").items())
            draws.acceptance_rates[k] = num_from(v);
        for (const auto& d : header.at("diagnostics"))
            draws.diagnostics.push_back(
                {d.at("name").get<std::string>(), num_from(d.at("rhat")), num_from(d.at("ess"))});
    } catch (const json::exception& e) {
        throw CorruptRecord(1, std::string("bad metadata fields: ") + e.what());
    }

    const auto per_chain = header.at("draws_per_chain").get<std::vector<std::size_t>>();
    draws.chains.resize(per_chain.size());
    std::size_t line_no = 1;
    for (std::size_t c = 0; c < per_chain.size(); ++c) {
        draws.chains[c].reserve(per_chain[c]);
        for (std::size_t d = 0; d < per_chain[c]; ++d) {
            ++line_no;
            if (!std::getline(in, line))
                throw CorruptRecord(line_no, "truncated file: expected a draw record");
            try {
                draws.chains[c].push_back(state_from_json(json::parse(line)));
            } catch (const std::exception& e) {
                throw CorruptRecord(line_no, std::string("bad draw record: ") + e.what());
            }
        }
    }
    return draws;
}

void write_truth_json(const ParameterState& state, const SimulationConfig& config,
                      const std::string& path) {
    FactorLayout layout = config.layout;
    layout.q = config.q_sim;
    json j{{"format", "bammit-truth"},
           {"version", 1},
           {"layout", layout_to_json(layout)},
           {"config",
            {{"q_sim", config.q_sim},
             {"lambda_true", config.lambda_true},
             {"mu_true", config.mu_true},
             {"sigma_true", config.sigma_true},
             {"sigma_b_true", config.sigma_b_true},
             {"seed", config.seed}}},
           {"state", state_to_json(state)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

ParameterState read_truth_json(const std::string& path, SimulationConfig* config_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorruptRecord(1, std::string("bad truth file: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "bammit-truth")
        throw VersionMismatch("not a bammit truth file");
    if (config_out) {
        config_out->layout = layout_from_json(j.at("layout"));
        const auto& cfg = j.at("config");
        config_out->q_sim = cfg.at("q_sim").get<std::size_t>();
        config_out->lambda_true = cfg.at("lambda_true").get<std::vector<double>>();
        config_out->mu_true = cfg.at("mu_true").get<double>();
        config_out->sigma_true = cfg.at("sigma_true").get<double>();
        config_out->sigma_b_true = cfg.at("sigma_b_true").get<double>();
        config_out->seed = cfg.at("seed").get<std::uint64_t>();
    }
    return state_from_json(j.at("state"));
}

}  // namespace bammit
