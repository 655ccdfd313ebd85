#include "rfec/window.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfec/errors.hpp"

namespace rfec {

namespace {
// Cell edges that land on the pipe ends up to rounding are accepted.
constexpr double kEdgeSlack = 1e-9;
}  // namespace

CellExtent cell_extent(const ToolGeometry& tool, double position, int j) {
    const double c = tool.cell_centre(position, j);
    const double half = 0.5 * tool.cell_pitch();
    return {c - half, c + half};
}

void check_window_on_profile(const ToolGeometry& tool, double profile_length, double position,
                             std::size_t sample_index) {
    const CellExtent first = cell_extent(tool, position, 0);
    const CellExtent last = cell_extent(tool, position, tool.k() - 1);
    const double slack = kEdgeSlack * tool.cell_pitch();
    if (last.hi <= slack || first.lo >= profile_length - slack) {
        throw InvalidArgument("window of sample " + std::to_string(sample_index) + " at " +
                              std::to_string(position) + " m lies outside the profile (0 to " +
                              std::to_string(profile_length) + " m)");
    }
}

std::vector<PieceOverlap> cell_overlaps(double step_length, std::size_t n_pieces, CellExtent cell) {
    std::vector<PieceOverlap> out;
    const double width = cell.hi - cell.lo;
    if (!(width > 0.0) || n_pieces == 0) return out;
    const double length = step_length * static_cast<double>(n_pieces);
    const double slack = kEdgeSlack * step_length;
    const double before = std::min(cell.hi, 0.0) - cell.lo;
    const double after = cell.hi - std::max(cell.lo, length);
    const double lo = std::clamp(cell.lo, 0.0, length);
    const double hi = std::clamp(cell.hi, 0.0, length);

    auto add = [&out](std::size_t piece, double len) {
        if (!out.empty() && out.back().piece == piece) {
            out.back().fraction += len;
        } else {
            out.push_back({piece, len});
        }
    };

    if (before > slack) add(0, before);
    if (hi > lo) {
        const auto first = std::min(static_cast<std::size_t>(std::floor(lo / step_length)), n_pieces - 1);
        const auto last = std::min(
            static_cast<std::size_t>(std::max(0.0, std::ceil(hi / step_length) - 1.0)), n_pieces - 1);
        for (std::size_t p = first; p <= last; ++p) {
            const double p_lo = step_length * static_cast<double>(p);
            const double p_hi = step_length * static_cast<double>(p + 1);
            const double len = std::min(hi, p_hi) - std::max(lo, p_lo);
            // Slivers below rounding level are dropped so an aligned cell maps
            // onto exactly one piece.
            if (len > slack) add(p, len);
        }
    }
    if (after > slack) add(n_pieces - 1, after);

    double total = 0.0;
    for (const auto& o : out) total += o.fraction;
    for (auto& o : out) o.fraction /= total;
    return out;
}

double cell_average(const PipeProfile& profile, CellExtent cell) {
    const auto overlaps = cell_overlaps(profile.step_length(), profile.size(), cell);
    const auto t = profile.thickness();
    double acc = 0.0;
    for (const auto& o : overlaps) acc += o.fraction * t[o.piece];
    return acc;
}

std::vector<double> sample_positions(const PipeProfile& profile, const ToolGeometry& tool) {
    if (profile.length() + kEdgeSlack * tool.cell_pitch() <
        static_cast<double>(tool.k()) * tool.cell_pitch()) {
        throw InvalidArgument("profile shorter than tool span");
    }
    const double first_centre = 0.5 * profile.step_length();
    const double last_centre = profile.length() - 0.5 * profile.step_length();
    const double first = first_centre - static_cast<double>(tool.k() - 1) * tool.cell_pitch();
    const auto count = static_cast<std::size_t>(
        std::floor((last_centre - first) / tool.sample_pitch() + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = first + static_cast<double>(i) * tool.sample_pitch();
    }
    return out;
}

bool extents_overlap(CellExtent a, CellExtent b) {
    return std::min(a.hi, b.hi) - std::max(a.lo, b.lo) > 0.0;
}

}  // namespace rfec
