#include "rfec/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfec/errors.hpp"
#include "rfec/window.hpp"

namespace rfec {

char to_char(DatasetMode mode) {
    switch (mode) {
        case DatasetMode::All: return 'a';
        case DatasetMode::NoReceiverJoints: return 'b';
        case DatasetMode::NoJoints: return 'c';
    }
    return '?';
}

DatasetMode parse_dataset_mode(std::string_view text) {
    if (text == "a") return DatasetMode::All;
    if (text == "b") return DatasetMode::NoReceiverJoints;
    if (text == "c") return DatasetMode::NoJoints;
    throw InvalidArgument("dataset mode must be a, b or c (got '" + std::string(text) + "')");
}

Eigen::MatrixXd build_T(const PipeProfile& profile, const ToolGeometry& tool,
                        std::span<const double> positions) {
    const auto m = static_cast<Eigen::Index>(positions.size());
    Eigen::MatrixXd T(m, tool.k() + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = positions[static_cast<std::size_t>(i)];
        check_window_on_profile(tool, profile.length(), x, static_cast<std::size_t>(i));
        T(i, 0) = 1.0;
        for (int j = 0; j < tool.k(); ++j) {
            T(i, j + 1) = cell_average(profile, cell_extent(tool, x, j));
        }
    }
    return T;
}

std::vector<bool> rows_touching_joints(const PipeProfile& profile, const ToolGeometry& tool,
                                       std::span<const double> positions, const CellRange& cells) {
    const double step = profile.step_length();
    const double slack = 1e-9 * std::min(step, tool.cell_pitch());
    const auto& joints = profile.joint_mask();
    std::vector<bool> touched(positions.size(), false);
    if (!profile.has_joints()) return touched;

    for (std::size_t i = 0; i < positions.size(); ++i) {
        // The selected cells are contiguous, so their union is one extent.
        const CellExtent lo = cell_extent(tool, positions[i], cells.first - 1);
        const CellExtent hi = cell_extent(tool, positions[i], cells.last - 1);
        const auto last_piece = static_cast<std::ptrdiff_t>(profile.size()) - 1;
        const auto first = std::clamp(static_cast<std::ptrdiff_t>(std::floor((lo.lo + slack) / step)),
                                      std::ptrdiff_t{0}, last_piece);
        const auto last = std::clamp(static_cast<std::ptrdiff_t>(std::floor((hi.hi - slack) / step)),
                                     std::ptrdiff_t{0}, last_piece);
        for (std::ptrdiff_t p = first; p <= last; ++p) {
            if (joints[static_cast<std::size_t>(p)]) {
                touched[i] = true;
                break;
            }
        }
    }
    return touched;
}

MaskedDataset mask_dataset(const Eigen::MatrixXd& T, const MeasurementSeries& y,
                           const PipeProfile& profile, const ToolGeometry& tool, DatasetMode mode) {
    if (static_cast<std::size_t>(T.rows()) != y.size()) {
        throw InvalidArgument("mask_dataset: T has " + std::to_string(T.rows()) + " rows but " +
                              std::to_string(y.size()) + " measurements were given");
    }
    std::vector<bool> drop(y.size(), false);
    if (mode != DatasetMode::All) {
        drop = rows_touching_joints(profile, tool, y.position(), tool.receiver_cells());
    }
    if (mode == DatasetMode::NoJoints) {
        const auto exciter = rows_touching_joints(profile, tool, y.position(), tool.exciter_cells());
        for (std::size_t i = 0; i < drop.size(); ++i) drop[i] = drop[i] || exciter[i];
    }

    MaskedDataset out;
    for (std::size_t i = 0; i < drop.size(); ++i) {
        if (!drop[i]) out.kept.push_back(i);
    }
    const auto kept = static_cast<Eigen::Index>(out.kept.size());
    out.T.resize(kept, T.cols());
    out.y.resize(kept);
    const auto values = y.log_amplitude();
    for (Eigen::Index r = 0; r < kept; ++r) {
        const auto src = out.kept[static_cast<std::size_t>(r)];
        out.T.row(r) = T.row(static_cast<Eigen::Index>(src));
        out.y(r) = values[src];
    }
    return out;
}

std::vector<bool> chauvenet_filter(std::span<const double> residuals) {
    const std::size_t m = residuals.size();
    if (m < 3) throw InvalidArgument("chauvenet_filter: at least 3 residuals are required");
    double mean = 0.0;
    for (double r : residuals) mean += r;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double r : residuals) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));

    std::vector<bool> keep(m, true);
    if (!(sd > 0.0)) return keep;
    for (std::size_t i = 0; i < m; ++i) {
        const double z = std::abs(residuals[i] - mean) / sd;
        keep[i] = static_cast<double>(m) * std::erfc(z / std::sqrt(2.0)) >= 0.5;
    }
    return keep;
}

WindowAlignment spatial_weights(double sample_position, std::span<const double> piece_centres) {
    if (piece_centres.empty()) throw InvalidArgument("spatial_weights: no piece centres");
    const std::size_t n = piece_centres.size();
    WindowAlignment out;
    out.sample_position = sample_position;
    if (n == 1) {
        out.left_piece_index = 0;
        out.a = 0.0;
        out.b = 1.0;
        return out;
    }
    if (sample_position <= piece_centres.front()) {
        out.left_piece_index = 0;
        out.a = 0.0;
        out.b = piece_centres[1] - piece_centres[0];
        return out;
    }
    if (sample_position >= piece_centres.back()) {
        out.left_piece_index = n - 2;
        out.a = piece_centres[n - 1] - piece_centres[n - 2];
        out.b = 0.0;
        return out;
    }
    const auto it = std::upper_bound(piece_centres.begin(), piece_centres.end(), sample_position);
    const auto right = static_cast<std::size_t>(it - piece_centres.begin());
    out.left_piece_index = right - 1;
    out.a = sample_position - piece_centres[right - 1];
    out.b = piece_centres[right] - sample_position;
    return out;
}

InverseSystem build_W(const DirectModel& model, const ToolGeometry& tool,
                      std::span<const double> piece_centres, double step_length,
                      std::span<const double> positions) {
    if (model.k() != static_cast<std::size_t>(tool.k())) {
        throw InvalidArgument("build_W: model has " + std::to_string(model.k()) +
                              " weights but the tool has k = " + std::to_string(tool.k()));
    }
    const std::size_t n = piece_centres.size();
    const double length = step_length * static_cast<double>(n);

    struct Contribution {
        std::size_t piece;
        double value;
    };
    std::vector<BandRow> rows;
    rows.reserve(positions.size());
    std::vector<Contribution> parts;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        check_window_on_profile(tool, length, positions[i], i);
        parts.clear();
        for (int c = 0; c < tool.k(); ++c) {
            const WindowAlignment al = spatial_weights(tool.cell_centre(positions[i], c), piece_centres);
            const double w = model.w[static_cast<std::size_t>(c)];
            const double left = al.a_bar();
            const double right = al.b_bar();
            if (left > 0.0) parts.push_back({al.left_piece_index, left * w});
            if (right > 0.0 && al.left_piece_index + 1 < n) {
                parts.push_back({al.left_piece_index + 1, right * w});
            }
        }
        BandRow row;
        if (!parts.empty()) {
            const auto [lo, hi] = std::minmax_element(
                parts.begin(), parts.end(),
                [](const Contribution& x, const Contribution& y) { return x.piece < y.piece; });
            row.start = lo->piece;
            row.values.assign(hi->piece - lo->piece + 1, 0.0);
            for (const auto& p : parts) row.values[p.piece - row.start] += p.value;
        }
        rows.push_back(std::move(row));
    }
    return InverseSystem(std::move(rows), model.y0, n);
}

}  // namespace rfec
