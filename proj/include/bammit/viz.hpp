#pragma once

#include <array>
#include <string>
#include <vector>

#include "bammit/analysis.hpp"

namespace bammit {

using Rgb = std::array<int, 3>;

/// Value-suppressing uncertainty palette: a binary tree of colour bins where
/// the number of distinguishable value bins halves with each step up in
/// uncertainty (1 bin at the most-uncertain level, 2^(L-1) at the least).
struct VsupPalette {
    int levels = 4;                       // L
    double value_lo = 0.0;
    double value_hi = 1.0;
    double uncertainty_max = 1.0;         // sd range is [0, uncertainty_max]
    Rgb color_lo = {33, 102, 172};        // anchor colour at value_lo
    Rgb color_hi = {178, 24, 43};         // anchor colour at value_hi

    /// Bin count at an uncertainty level (level 0 = most uncertain).
    int bins_at_level(int level) const { return 1 << level; }

    /// Colour of one (level, bin) tree cell: a linear ramp between the two
    /// anchors, desaturated toward gray as uncertainty rises.
    Rgb color(int level, int bin) const;
};

struct VsupCell {
    int level = 0;
    int bin = 0;
    Rgb color = {0, 0, 0};
};

/// Quantize a (value, sd) pair into the palette tree. Out-of-range inputs
/// clamp; sd >= uncertainty_max maps to the single-bin level.
VsupCell vsup_quantize(const VsupPalette& palette, double value, double sd);

/// A complete grid of prediction summaries over one factor pair.
struct SummaryGrid {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<PredictionSummary>> cells;  // [row][col]
};

/// Row/column orders by descending mean of medians, ties broken by label.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> heatmap_order(
    const SummaryGrid& grid);

/// Standalone SVG heatmap: one rect per cell coloured by vsup_quantize,
/// ordered by heatmap_order, with axis labels and the palette wedge legend.
/// Byte-identical output for identical inputs.
void emit_heatmap_svg(const SummaryGrid& grid, const VsupPalette& palette,
                      const std::string& title, const std::string& path);

/// Palette with value/uncertainty ranges fitted to one grid.
VsupPalette palette_for_grid(const SummaryGrid& grid, int levels = 4);

struct LevelSummaryRow {
    std::string level;
    double median = 0.0;
    double lower = 0.0;  // median - 2 sd
    double upper = 0.0;  // median + 2 sd
};

/// Per level of `factor`: each draw contributes its mean predicted response
/// over the level's grid cells; median/sd are taken over draws and
/// bounds = median +- 2 sd. A single-draw posterior collapses to the point.
std::vector<LevelSummaryRow> level_summary(const PosteriorDraws& draws, std::size_t factor);

/// Write level_summary rows as CSV (level,median,lower,upper).
void emit_level_summary(const PosteriorDraws& draws, std::size_t factor,
                        const std::string& path);

}  // namespace bammit
