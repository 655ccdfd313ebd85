#pragma once

// Sliding-window geometry shared by the synthetic generator and the
// design-matrix builders, so both see identical cell averages.
//
// Beyond either end the pipe is taken to continue with the thickness of its
// end piece, so a window may hang past the ends while the tool enters and
// leaves the pipe.

#include <cstddef>
#include <vector>

#include "rfec/core.hpp"

namespace rfec {

/// Axial extent [lo, hi] of a window cell, metres.
struct CellExtent {
    double lo = 0.0;
    double hi = 0.0;
};

/// Fraction of a cell covered by one profile piece.
struct PieceOverlap {
    std::size_t piece = 0;
    double fraction = 0.0;
};

CellExtent cell_extent(const ToolGeometry& tool, double position, int j);

/// Throws InvalidArgument naming `sample_index` when the window at
/// `position` does not overlap [0, profile_length].
void check_window_on_profile(const ToolGeometry& tool, double profile_length, double position,
                             std::size_t sample_index);

/// Pieces overlapping `cell` with their share of the cell length. Parts of
/// the cell past either end count towards the end piece, so the fractions
/// always sum to 1.
std::vector<PieceOverlap> cell_overlaps(double step_length, std::size_t n_pieces, CellExtent cell);

/// Overlap-weighted mean thickness of the profile over `cell`, mm.
double cell_average(const PipeProfile& profile, CellExtent cell);

/// Uniformly spaced sample positions covering the full passage of the tool:
/// the first sample puts cell k on the centre of the first piece, the last
/// one keeps cell 1 at or before the centre of the last piece.
std::vector<double> sample_positions(const PipeProfile& profile, const ToolGeometry& tool);

/// True when the two extents share a segment of positive length.
bool extents_overlap(CellExtent a, CellExtent b);

}  // namespace rfec
