#pragma once

#include <string>
#include <vector>

#include "bammit/sampler.hpp"
#include "bammit/simulate.hpp"

namespace bammit {

/// A parsed delimited text file: header plus string rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws MissingColumn.
    std::size_t column(const std::string& name) const;
};

/// Comma-delimited, header row required. Throws IoError if unreadable,
/// EmptyFile if there is no header or no data rows.
CsvTable parse_csv(const std::string& path);

/// Build a dataset from a parsed table. Factor levels are mapped to indices
/// in first-appearance order; unparseable responses raise ParseError naming
/// the offending rows.
Dataset dataset_from_table(const CsvTable& table, const std::vector<std::string>& factor_columns,
                           const std::string& response_column);

Dataset parse_dataset_csv(const std::string& path,
                          const std::vector<std::string>& factor_columns,
                          const std::string& response_column);

/// Write a dataset back out as CSV (factor columns by name, then response).
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Map a row of factor level names onto a layout's level indices.
/// Throws ArgumentError on unknown level names.
Cell cell_from_names(const FactorLayout& layout, const std::vector<std::string>& names);

/// Persist draws as newline-delimited JSON: one versioned metadata record,
/// then one record per draw. Round-trips are lossless (floats bit-exact).
void write_draws(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws read_draws(const std::string& path);

/// Ground-truth state + simulation config, for later recovery checks.
void write_truth_json(const ParameterState& state, const SimulationConfig& config,
                      const std::string& path);
ParameterState read_truth_json(const std::string& path, SimulationConfig* config_out = nullptr);

}  // namespace bammit
