#pragma once

// Design matrices for the direct problem (T) and the inverse problem (W),
// plus the row selection used to keep joint-affected samples out of fits.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfec/core.hpp"

namespace rfec {

/// Position of a point between the two piece centres that bracket it.
struct WindowAlignment {
    double sample_position = 0.0;  ///< m
    std::size_t left_piece_index = 0;
    double a = 0.0;  ///< distance to the centre of the left piece, m
    double b = 0.0;  ///< distance to the centre of the right piece, m

    /// Weight of the left piece, b/(a+b).
    double a_bar() const { return b / (a + b); }
    /// Weight of the right piece, a/(a+b).
    double b_bar() const { return a / (a + b); }
};

enum class DatasetMode {
    All,               ///< (a) every sample
    NoReceiverJoints,  ///< (b) drop samples with a joint under the receiver
    NoJoints,          ///< (c) drop samples with a joint under the receiver or the exciter
};

char to_char(DatasetMode mode);
/// Parses "a", "b" or "c".
DatasetMode parse_dataset_mode(std::string_view text);

struct MaskedDataset {
    Eigen::MatrixXd T;
    Eigen::VectorXd y;
    std::vector<std::size_t> kept;  ///< original row indices, ascending
};

/// m x (k+1) direct design matrix: column 0 is ones, column j holds the
/// overlap-weighted mean thickness (mm) under window cell j.
Eigen::MatrixXd build_T(const PipeProfile& profile, const ToolGeometry& tool,
                        std::span<const double> positions);

/// Row indices whose cells in `cells` overlap a joint piece by a positive
/// length.
std::vector<bool> rows_touching_joints(const PipeProfile& profile, const ToolGeometry& tool,
                                       std::span<const double> positions, const CellRange& cells);

/// Drops rows according to `mode`. Rows of T correspond to `y` samples.
MaskedDataset mask_dataset(const Eigen::MatrixXd& T, const MeasurementSeries& y,
                           const PipeProfile& profile, const ToolGeometry& tool, DatasetMode mode);

/// Chauvenet's criterion, single pass: sample i is rejected when
/// m * erfc(|r_i - mean| / (sqrt(2) * sd)) < 0.5, sd being the sample
/// standard deviation. Returns true for kept samples.
std::vector<bool> chauvenet_filter(std::span<const double> residuals);

/// Bracketing piece centres for `sample_position`. Points outside the first
/// or last centre are clamped onto that piece with full weight.
WindowAlignment spatial_weights(double sample_position, std::span<const double> piece_centres);

/// Inverse-problem matrix: each window cell's weight is split between the
/// two pieces bracketing the cell centre with the spatial weights above.
InverseSystem build_W(const DirectModel& model, const ToolGeometry& tool,
                      std::span<const double> piece_centres, double step_length,
                      std::span<const double> positions);

}  // namespace rfec
