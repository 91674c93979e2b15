#include "bammit/layout.hpp"

#include <set>

#include "bammit/errors.hpp"

namespace bammit {

std::size_t FactorLayout::grid_size() const {
    std::size_t n = 1;
    for (std::size_t b : dims) n *= b;
    return n;
}

void FactorLayout::validate() const {
    if (dims.size() < 2)
        throw ArgumentError("layout requires at least 2 factors, got " +
                            std::to_string(dims.size()));
    for (std::size_t v = 0; v < dims.size(); ++v)
        if (dims[v] < 2)
            throw ArgumentError("factor " + std::to_string(v + 1) +
                                " must have >= 2 levels, got " + std::to_string(dims[v]));
    if (q < 1) throw ArgumentError("Q must be >= 1");
    if (!level_names.empty()) {
        if (level_names.size() != dims.size())
            throw ArgumentError("level_names must have one entry per factor");
        for (std::size_t v = 0; v < dims.size(); ++v) {
            if (level_names[v].size() != dims[v])
                throw ArgumentError("level_names for factor " + std::to_string(v + 1) +
                                    " has wrong length");
            std::set<std::string> distinct(level_names[v].begin(), level_names[v].end());
            if (distinct.size() != dims[v])
                throw ArgumentError("level_names for factor " + std::to_string(v + 1) +
                                    " are not distinct");
        }
    }
}

FactorLayout FactorLayout::make(std::vector<std::size_t> dims, std::size_t q) {
    FactorLayout layout;
    layout.dims = std::move(dims);
    layout.q = q;
    layout.level_names.resize(layout.dims.size());
    layout.factor_names.resize(layout.dims.size());
    for (std::size_t v = 0; v < layout.dims.size(); ++v) {
        layout.factor_names[v] = "f" + std::to_string(v + 1);
        for (std::size_t i = 0; i < layout.dims[v]; ++i)
            layout.level_names[v].push_back(std::to_string(i + 1));
    }
    layout.validate();
    return layout;
}

std::size_t flatten_index(const FactorLayout& layout, const Cell& cell) {
    if (cell.size() != layout.dims.size())
        throw IndexError("cell has " + std::to_string(cell.size()) + " entries, layout has " +
                         std::to_string(layout.dims.size()) + " factors");
    std::size_t idx = 0;
    for (std::size_t v = 0; v < cell.size(); ++v) {
        if (cell[v] >= layout.dims[v])
            throw IndexError("factor " + std::to_string(v + 1) + ": level index " +
                             std::to_string(cell[v]) + " out of range [0, " +
                             std::to_string(layout.dims[v]) + ")");
        idx = idx * layout.dims[v] + cell[v];
    }
    return idx;
}

Cell unflatten_index(const FactorLayout& layout, std::size_t index) {
    if (index >= layout.grid_size())
        throw IndexError("linear index " + std::to_string(index) + " out of range");
    Cell cell(layout.dims.size());
    for (std::size_t v = layout.dims.size(); v-- > 0;) {
        cell[v] = index % layout.dims[v];
        index /= layout.dims[v];
    }
    return cell;
}

namespace {

// Shared expansion loop: both operators fill the output in the flatten_index
// order by running an odometer over the cell tuples.
template <typename Init, typename Combine>
std::vector<double> expand(const std::vector<std::vector<double>>& vectors, Init init,
                           Combine combine) {
    if (vectors.empty()) throw ArgumentError("expected a nonempty list of vectors");
    std::size_t n = 1;
    for (const auto& vec : vectors) {
        if (vec.empty()) throw ArgumentError("factor vectors must be nonempty");
        n *= vec.size();
    }
    // Dense materialization is capped; larger grids must be evaluated per cell.
    if (n > 1'000'000)
        throw ArgumentError("grid of size " + std::to_string(n) +
                            " exceeds the dense materialization cap of 1e6");
    std::vector<double> out(n);
    std::vector<std::size_t> cell(vectors.size(), 0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        double acc = init;
        for (std::size_t v = 0; v < vectors.size(); ++v) acc = combine(acc, vectors[v][cell[v]]);
        out[idx] = acc;
        for (std::size_t v = vectors.size(); v-- > 0;) {
            if (++cell[v] < vectors[v].size()) break;
            cell[v] = 0;
        }
    }
    return out;
}

}  // namespace

std::vector<double> direct_sum_cumulative(const std::vector<std::vector<double>>& vectors) {
    return expand(vectors, 0.0, [](double a, double b) { return a + b; });
}

std::vector<double> kronecker_cumulative(const std::vector<std::vector<double>>& vectors) {
    return expand(vectors, 1.0, [](double a, double b) { return a * b; });
}

}  // namespace bammit
