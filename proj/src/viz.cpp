#include "bammit/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bammit/errors.hpp"

namespace bammit {

namespace {

int lerp_channel(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

std::string fmt4(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

}  // namespace

Rgb VsupPalette::color(int level, int bin) const {
    const int nbins = bins_at_level(level);
    const double t = (bin + 0.5) / nbins;
    Rgb base;
    for (int c = 0; c < 3; ++c) base[c] = lerp_channel(color_lo[c], color_hi[c], t);
    // Desaturate toward neutral gray as the level rises in uncertainty.
    const double gray_amount =
        levels > 1 ? 0.85 * (levels - 1 - level) / static_cast<double>(levels - 1) : 0.0;
    constexpr int gray = 180;
    for (int c = 0; c < 3; ++c) base[c] = lerp_channel(base[c], gray, gray_amount);
    return base;
}

VsupCell vsup_quantize(const VsupPalette& palette, double value, double sd) {
    if (sd < 0.0) sd = 0.0;
    const int levels = palette.levels;
    int band;
    if (palette.uncertainty_max <= 0.0 || sd >= palette.uncertainty_max) {
        band = levels - 1;
    } else {
        band = static_cast<int>(std::floor(sd / palette.uncertainty_max * levels));
        band = std::clamp(band, 0, levels - 1);
    }
    VsupCell cell;
    cell.level = levels - 1 - band;  // level 0 has a single bin
    const int nbins = palette.bins_at_level(cell.level);
    const double span = palette.value_hi - palette.value_lo;
    if (span <= 0.0) {
        cell.bin = 0;
    } else {
        const int b = static_cast<int>(std::floor((value - palette.value_lo) / span * nbins));
        cell.bin = std::clamp(b, 0, nbins - 1);
    }
    cell.color = palette.color(cell.level, cell.bin);
    return cell;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> heatmap_order(
    const SummaryGrid& grid) {
    const std::size_t nrow = grid.cells.size();
    if (nrow == 0) throw ArgumentError("empty grid");
    const std::size_t ncol = grid.cells[0].size();
    for (const auto& row : grid.cells)
        if (row.size() != ncol) throw ArgumentError("ragged grid");

    std::vector<double> row_mean(nrow, 0.0), col_mean(ncol, 0.0);
    for (std::size_t i = 0; i < nrow; ++i)
        for (std::size_t j = 0; j < ncol; ++j) {
            row_mean[i] += grid.cells[i][j].median / ncol;
            col_mean[j] += grid.cells[i][j].median / nrow;
        }

    auto sorted_order = [](const std::vector<double>& means,
                           const std::vector<std::string>& labels) {
        std::vector<std::size_t> order(means.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (means[a] != means[b]) return means[a] > means[b];
            return labels[a] < labels[b];
        });
        return order;
    };
    return {sorted_order(row_mean, grid.row_labels), sorted_order(col_mean, grid.col_labels)};
}

VsupPalette palette_for_grid(const SummaryGrid& grid, int levels) {
    VsupPalette p;
    p.levels = levels;
    double lo = 1e300, hi = -1e300, sd_max = 0.0;
    for (const auto& row : grid.cells)
        for (const auto& c : row) {
            lo = std::min(lo, c.median);
            hi = std::max(hi, c.median);
            sd_max = std::max(sd_max, c.sd);
        }
    p.value_lo = lo;
    p.value_hi = hi > lo ? hi : lo + 1.0;
    p.uncertainty_max = sd_max > 0.0 ? sd_max * (1.0 + 1e-9) : 1.0;
    return p;
}

void emit_heatmap_svg(const SummaryGrid& grid, const VsupPalette& palette,
                      const std::string& title, const std::string& path) {
    auto [row_order, col_order] = heatmap_order(grid);
    const std::size_t nrow = row_order.size();
    const std::size_t ncol = col_order.size();

    constexpr double cell = 22.0;
    constexpr double left = 70.0, top = 40.0;
    const double legend_x = left + ncol * cell + 30.0;
    const double max_bins = static_cast<double>(1 << (palette.levels - 1));
    const double legend_w = std::max(120.0, max_bins * 14.0);
    const double width = legend_x + legend_w + 20.0;
    const double height = std::max(top + nrow * cell + 50.0,
                                   top + palette.levels * 18.0 + 60.0);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" font-family=\"sans-serif\">\n";
    svg << "<text x=\"" << fmt(left) << "\" y=\"20\" font-size=\"14\">" << title
        << "</text>\n";

    for (std::size_t r = 0; r < nrow; ++r) {
        for (std::size_t c = 0; c < ncol; ++c) {
            const auto& s = grid.cells[row_order[r]][col_order[c]];
            const VsupCell q = vsup_quantize(palette, s.median, s.sd);
            svg << "<rect class=\"cell\" x=\"" << fmt(left + c * cell) << "\" y=\""
                << fmt(top + r * cell) << "\" width=\"" << fmt(cell) << "\" height=\""
                << fmt(cell) << "\" fill=\"rgb(" << q.color[0] << "," << q.color[1] << ","
                << q.color[2] << ")\" data-median=\"" << fmt4(s.median) << "\" data-sd=\""
                << fmt4(s.sd) << "\"/>\n";
        }
    }
    for (std::size_t r = 0; r < nrow; ++r)
        svg << "<text x=\"" << fmt(left - 5.0) << "\" y=\"" << fmt(top + r * cell + 15.0)
            << "\" font-size=\"10\" text-anchor=\"end\">" << grid.row_labels[row_order[r]]
            << "</text>\n";
    for (std::size_t c = 0; c < ncol; ++c)
        svg << "<text x=\"" << fmt(left + c * cell + 11.0) << "\" y=\""
            << fmt(top + nrow * cell + 14.0)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << grid.col_labels[col_order[c]]
            << "</text>\n";

    // Legend: the palette wedge, one row of bins per uncertainty level,
    // widest (most bins) at the bottom.
    svg << "<text x=\"" << fmt(legend_x) << "\" y=\"" << fmt(top - 8.0)
        << "\" font-size=\"10\">uncertainty</text>\n";
    for (int level = 0; level < palette.levels; ++level) {
        const int nbins = palette.bins_at_level(level);
        const double bin_w = legend_w / nbins;
        const double y = top + level * 18.0;
        for (int bin = 0; bin < nbins; ++bin) {
            const Rgb col = palette.color(level, bin);
            svg << "<rect class=\"legend\" x=\"" << fmt(legend_x + bin * bin_w) << "\" y=\""
                << fmt(y) << "\" width=\"" << fmt(bin_w) << "\" height=\"16.00\" fill=\"rgb("
                << col[0] << "," << col[1] << "," << col[2] << ")\"/>\n";
        }
    }
    svg << "<text x=\"" << fmt(legend_x) << "\" y=\""
        << fmt(top + palette.levels * 18.0 + 14.0) << "\" font-size=\"10\">value "
        << fmt(palette.value_lo) << " to " << fmt(palette.value_hi) << ", sd up to "
        << fmt(palette.uncertainty_max) << "</text>\n";
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << svg.str();
    if (!out) throw IoError("write failed for " + path);
}

std::vector<LevelSummaryRow> level_summary(const PosteriorDraws& draws, std::size_t factor) {
    const auto& layout = draws.layout;
    if (factor >= layout.n_factors()) throw ArgumentError("factor index out of range");
    if (draws.n_draws_total() == 0) throw ArgumentError("no draws");

    std::vector<LevelSummaryRow> rows;
    const std::size_t n = layout.grid_size();
    const std::size_t cells_per_level = n / layout.dims[factor];
    std::vector<double> values;  // one per draw: mean prediction over the level's cells
    for (std::size_t lvl = 0; lvl < layout.dims[factor]; ++lvl) {
        values.clear();
        for (const auto& chain : draws.chains) {
            for (const auto& state : chain) {
                double total = 0.0;
                std::vector<std::size_t> cell(layout.n_factors(), 0);
                for (std::size_t idx = 0; idx < n; ++idx) {
                    if (cell[factor] == lvl) {
                        double y = state.mu;
                        for (std::size_t v = 0; v < cell.size(); ++v)
                            y += state.main_effects[v][cell[v]];
                        for (std::size_t q = 0; q < state.lambda.size(); ++q) {
                            double prod = state.lambda[q];
                            for (std::size_t v = 0; v < cell.size(); ++v)
                                prod *= state.beta[v][q][cell[v]];
                            y += prod;
                        }
                        total += y;
                    }
                    for (std::size_t v = cell.size(); v-- > 0;) {
                        if (++cell[v] < layout.dims[v]) break;
                        cell[v] = 0;
                    }
                }
                values.push_back(total / static_cast<double>(cells_per_level));
            }
        }
        const SummaryStats s = summarize_scalar(values);
        LevelSummaryRow row;
        row.level = layout.level_names.empty() ? std::to_string(lvl + 1)
                                               : layout.level_names[factor][lvl];
        row.median = s.q50;
        row.lower = s.q50 - 2.0 * s.sd;
        row.upper = s.q50 + 2.0 * s.sd;
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_level_summary(const PosteriorDraws& draws, std::size_t factor,
                        const std::string& path) {
    auto rows = level_summary(draws, factor);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "level,median,lower,upper\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", r.median, r.lower, r.upper);
        out << r.level << "," << buf << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace bammit
