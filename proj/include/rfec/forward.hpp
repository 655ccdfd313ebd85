#pragma once

// Skin-depth attenuation and the synthetic inspection generator.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rfec/core.hpp"

namespace rfec {

/// ln(B) after crossing `thickness_m` metres of wall: log_b0 - kappa * t.
double log_amplitude_after_wall(double log_b0, const MaterialProperties& mat, double thickness_m);

/// Phase lag after crossing `thickness_m` metres of wall: kappa * t, rad.
double phase_lag_after_wall(const MaterialProperties& mat, double thickness_m);

/// Electromagnetic wavelength 2*pi/kappa in the medium, metres. Throws for a
/// non-conductive medium.
double wavelength(const MaterialProperties& mat);

/// Largest admissible mesh element, one fifth of the wavelength, metres.
double min_mesh_size(const MaterialProperties& mat);

/// Parameters of a synthetic pipe and of the sensor that inspects it.
struct SynthesisSpec {
    std::size_t n_pieces = 600;
    double step_length = 0.1;                   ///< m
    double base_thickness = 30.0;               ///< mm
    double corrosion_amplitude = 3.0;           ///< mm, standard deviation of the perturbation
    double corrosion_correlation_length = 0.5;  ///< m
    std::vector<std::size_t> joint_positions;   ///< piece indices
    double joint_extra_thickness = 60.0;        ///< mm
    /// Multiplier applied to joint pieces when generating measurements;
    /// 1 keeps the generator linear, values below 1 emulate the field
    /// bypassing the joint.
    double joint_damping = 1.0;
    double noise_sigma = 0.0;  ///< log-amplitude units
    std::uint64_t seed = 0;
    DirectModel true_model;

    /// Throws InvalidArgument when an invariant does not hold.
    void validate() const;
};

/// Joint piece indices every `spacing_pieces`, each `width` pieces wide,
/// starting at `offset`.
std::vector<std::size_t> periodic_joint_positions(std::size_t n_pieces, std::size_t spacing_pieces,
                                                  std::size_t width, std::size_t offset);

/// Corroded profile with bell-and-spigot joints. Deterministic in `spec.seed`.
PipeProfile synth_profile(const SynthesisSpec& spec);

/// Measurements of `profile` by `tool` under the linear superposition model
/// y = y0 + sum_c w_c * tbar_c + eps, at the positions returned by
/// sample_positions(). Phase carries the noiseless attenuation in radians
/// plus independent noise of the same scale.
MeasurementSeries synth_measurements(const PipeProfile& profile, const ToolGeometry& tool,
                                     const SynthesisSpec& spec);

}  // namespace rfec
