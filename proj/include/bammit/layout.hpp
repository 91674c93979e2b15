#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bammit {

/// The factor structure of a model: V factors with B_v levels each and Q
/// multiplicative components. Fixes the cell-tuple <-> linear-index mapping
/// used by every other module (factor 1 slowest-varying, factor V fastest).
struct FactorLayout {
    std::vector<std::size_t> dims;                        // B_1..B_V, each >= 2
    std::size_t q = 1;                                    // components, >= 1
    std::vector<std::vector<std::string>> level_names;    // per factor, size B_v
    std::vector<std::string> factor_names;                // optional, size V

    std::size_t n_factors() const { return dims.size(); }

    /// Full grid size, prod B_v.
    std::size_t grid_size() const;

    /// Throws ArgumentError if any invariant is violated.
    void validate() const;

    /// Layout with default level names "1".."B_v" and factor names "f1".."fV".
    static FactorLayout make(std::vector<std::size_t> dims, std::size_t q);

    bool operator==(const FactorLayout&) const = default;
};

using Cell = std::vector<std::size_t>;

/// Row-major linear index of a cell (factor 1 slowest-varying).
/// Throws IndexError naming the offending factor if out of range.
std::size_t flatten_index(const FactorLayout& layout, const Cell& cell);

/// Inverse of flatten_index.
Cell unflatten_index(const FactorLayout& layout, std::size_t index);

/// Cumulative direct sum: entry at flatten_index(cell) is sum_v vectors[v][cell_v].
std::vector<double> direct_sum_cumulative(const std::vector<std::vector<double>>& vectors);

/// Cumulative Kronecker product: entry at flatten_index(cell) is
/// prod_v vectors[v][cell_v]. Same element ordering as direct_sum_cumulative.
std::vector<double> kronecker_cumulative(const std::vector<std::vector<double>>& vectors);

}  // namespace bammit
