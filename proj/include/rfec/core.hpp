#pragma once

// Shared domain types. Units: thickness in millimetres, axial distances in
// metres, log-amplitude in nepers, phase in radians.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rfec {

/// Vacuum permeability, H/m.
inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;
inline constexpr double kPi = 3.14159265358979323846;

/// Electromagnetic properties of a homogeneous medium at one excitation
/// frequency. `mu()` is the absolute permeability used in every formula;
/// `mu_r()` is kept alongside it so configs can quote relative values.
class MaterialProperties {
public:
    /// omega in rad/s, mu_r dimensionless, sigma in S/m.
    MaterialProperties(double omega, double mu_r, double sigma);

    static MaterialProperties from_frequency(double frequency_hz, double mu_r, double sigma);

    double omega() const { return omega_; }
    double mu_r() const { return mu_r_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }

private:
    double omega_;
    double mu_r_;
    double mu_;
    double sigma_;
};

/// Material constants of the reference inspection scenario, evaluated at the
/// given angular frequency.
namespace materials {
MaterialProperties cast_iron(double omega);
MaterialProperties copper(double omega);
MaterialProperties air(double omega);
}  // namespace materials

/// Piecewise-constant wall-thickness profile. Piece i spans
/// [i*step, (i+1)*step) metres from the start of the pipe.
class PipeProfile {
public:
    PipeProfile(double step_length, std::vector<double> thickness, std::vector<bool> joint_mask);
    /// Joint-free profile.
    PipeProfile(double step_length, std::vector<double> thickness);

    std::size_t size() const { return thickness_.size(); }
    double step_length() const { return step_; }
    double length() const { return step_ * static_cast<double>(thickness_.size()); }
    double centre(std::size_t i) const { return (static_cast<double>(i) + 0.5) * step_; }
    std::vector<double> centres() const;

    std::span<const double> thickness() const { return thickness_; }
    const std::vector<bool>& joint_mask() const { return joint_mask_; }
    bool has_joints() const;

private:
    double step_;
    std::vector<double> thickness_;
    std::vector<bool> joint_mask_;
};

/// Inclusive 1-based range of window cells, matching the w1..wk naming.
struct CellRange {
    int first = 1;
    int last = 1;

    int size() const { return last - first + 1; }
    bool contains(int cell) const { return cell >= first && cell <= last; }
    bool overlaps(const CellRange& other) const {
        return first <= other.last && other.first <= last;
    }
    friend bool operator==(const CellRange&, const CellRange&) = default;
};

/// Layout of the sliding window carried by the tool. A measurement taken at
/// axial position x sees k cells of width `cell_pitch()` centred at
/// x, x + pitch, ..., x + (k-1)*pitch.
class ToolGeometry {
public:
    ToolGeometry(int k, double cell_pitch, CellRange exciter_cells, CellRange receiver_cells,
                 double sample_pitch);

    int k() const { return k_; }
    double cell_pitch() const { return cell_pitch_; }
    double sample_pitch() const { return sample_pitch_; }
    const CellRange& exciter_cells() const { return exciter_; }
    const CellRange& receiver_cells() const { return receiver_; }

    /// Centre of 0-based cell j for a measurement at `position`.
    double cell_centre(double position, int j) const {
        return position + static_cast<double>(j) * cell_pitch_;
    }

private:
    int k_;
    double cell_pitch_;
    CellRange exciter_;
    CellRange receiver_;
    double sample_pitch_;
};

/// Log-amplitude samples (and optionally phase lag) along the pipe.
class MeasurementSeries {
public:
    MeasurementSeries(std::vector<double> position, std::vector<double> log_amplitude,
                      std::optional<std::vector<double>> phase = std::nullopt);

    std::size_t size() const { return position_.size(); }
    std::span<const double> position() const { return position_; }
    std::span<const double> log_amplitude() const { return log_amplitude_; }
    const std::optional<std::vector<double>>& phase() const { return phase_; }

private:
    std::vector<double> position_;
    std::vector<double> log_amplitude_;
    std::optional<std::vector<double>> phase_;
};

/// Fitted direct sensor model y = y0 + sum_c w_c * t_c. Weights are signed;
/// attenuation gives negative values.
struct DirectModel {
    double y0 = 0.0;
    std::vector<double> w;
    double alpha = 0.0;
    double mse = 0.0;
    double r2 = 0.0;

    std::size_t k() const { return w.size(); }
};

/// One row of a banded matrix: `values[i]` sits at column `start + i`.
struct BandRow {
    std::size_t start = 0;
    std::vector<double> values;
};

/// The m x n inverse-problem system y = W t + y0, with W stored by rows.
class InverseSystem {
public:
    InverseSystem(std::vector<BandRow> rows, double y0, std::size_t n);

    std::size_t m() const { return rows_.size(); }
    std::size_t n() const { return n_; }
    double y0() const { return y0_; }
    const std::vector<BandRow>& rows() const { return rows_; }

    /// Largest row segment length.
    std::size_t bandwidth() const;
    /// W * t.
    std::vector<double> apply(std::span<const double> t) const;
    /// W^T * v.
    std::vector<double> apply_transpose(std::span<const double> v) const;
    /// Row-major dense copy, m*n entries.
    std::vector<double> dense() const;

private:
    std::vector<BandRow> rows_;
    double y0_;
    std::size_t n_;
};

/// Skin-depth attenuation constant sqrt(omega*mu*sigma/2), 1/m.
double attenuation_constant(const MaterialProperties& mat);

}  // namespace rfec
