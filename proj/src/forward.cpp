#include "rfec/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rfec/errors.hpp"
#include "rfec/window.hpp"

namespace rfec {

double log_amplitude_after_wall(double log_b0, const MaterialProperties& mat, double thickness_m) {
    if (!(thickness_m >= 0.0)) throw InvalidArgument("thickness must be non-negative");
    return log_b0 - attenuation_constant(mat) * thickness_m;
}

double phase_lag_after_wall(const MaterialProperties& mat, double thickness_m) {
    if (!(thickness_m >= 0.0)) throw InvalidArgument("thickness must be non-negative");
    return attenuation_constant(mat) * thickness_m;
}

double wavelength(const MaterialProperties& mat) {
    if (mat.sigma() == 0.0) {
        throw InvalidArgument("infinite wavelength in non-conductive medium");
    }
    return 2.0 * kPi / attenuation_constant(mat);
}

double min_mesh_size(const MaterialProperties& mat) { return wavelength(mat) / 5.0; }

void SynthesisSpec::validate() const {
    if (n_pieces == 0) throw InvalidArgument("synthesis: n_pieces must be positive");
    if (!(step_length > 0.0)) throw InvalidArgument("synthesis: step_length must be positive");
    if (!(base_thickness > 0.0)) throw InvalidArgument("synthesis: base_thickness must be positive");
    if (!(corrosion_amplitude >= 0.0) || !(corrosion_amplitude < base_thickness)) {
        throw InvalidArgument("synthesis: corrosion_amplitude must lie in [0, base_thickness)");
    }
    if (!(corrosion_correlation_length >= 0.0)) {
        throw InvalidArgument("synthesis: corrosion_correlation_length must be non-negative");
    }
    if (!(joint_extra_thickness >= 0.0)) {
        throw InvalidArgument("synthesis: joint_extra_thickness must be non-negative");
    }
    if (!(joint_damping >= 0.0)) throw InvalidArgument("synthesis: joint_damping must be non-negative");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("synthesis: noise_sigma must be non-negative");
}

std::vector<std::size_t> periodic_joint_positions(std::size_t n_pieces, std::size_t spacing_pieces,
                                                  std::size_t width, std::size_t offset) {
    if (spacing_pieces == 0) throw InvalidArgument("joint spacing must be positive");
    std::vector<std::size_t> out;
    for (std::size_t start = offset; start < n_pieces; start += spacing_pieces) {
        for (std::size_t i = start; i < std::min(start + width, n_pieces); ++i) out.push_back(i);
    }
    return out;
}

PipeProfile synth_profile(const SynthesisSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_pieces;
    for (std::size_t j : spec.joint_positions) {
        if (j >= n) {
            throw InvalidArgument("synthesis: joint index " + std::to_string(j) +
                                  " out of range for " + std::to_string(n) + " pieces");
        }
    }

    std::vector<double> thickness(n, spec.base_thickness);
    if (spec.corrosion_amplitude > 0.0) {
        const auto width = static_cast<std::size_t>(
            std::max(1.0, std::round(spec.corrosion_correlation_length / spec.step_length)));
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> white(0.0, 1.0);
        std::vector<double> raw(n + width - 1);
        for (auto& v : raw) v = white(rng);

        // Moving average of `width` unit normals, rescaled to unit variance.
        const double scale = spec.corrosion_amplitude / std::sqrt(static_cast<double>(width));
        const double floor_mm = 0.1 * spec.base_thickness;
        double window = 0.0;
        for (std::size_t i = 0; i < width - 1; ++i) window += raw[i];
        for (std::size_t i = 0; i < n; ++i) {
            window += raw[i + width - 1];
            thickness[i] = std::max(floor_mm, spec.base_thickness + scale * window);
            window -= raw[i];
        }
    }

    std::vector<bool> joints(n, false);
    for (std::size_t j : spec.joint_positions) {
        joints[j] = true;
        thickness[j] = spec.base_thickness + spec.joint_extra_thickness;
    }
    return PipeProfile(spec.step_length, std::move(thickness), std::move(joints));
}

MeasurementSeries synth_measurements(const PipeProfile& profile, const ToolGeometry& tool,
                                     const SynthesisSpec& spec) {
    spec.validate();
    const DirectModel& model = spec.true_model;
    if (model.k() != static_cast<std::size_t>(tool.k())) {
        throw InvalidArgument("synthesis: true model has " + std::to_string(model.k()) +
                              " weights but the tool has k = " + std::to_string(tool.k()));
    }
    std::vector<double> positions = sample_positions(profile, tool);
    const std::size_t m = positions.size();
    const auto t = profile.thickness();
    const auto& joints = profile.joint_mask();

    std::vector<double> y(m);
    std::vector<double> phase(m);
    std::mt19937_64 amp_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
    std::mt19937_64 phase_rng(spec.seed ^ 0xC2B2AE3D27D4EB4FULL);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (std::size_t i = 0; i < m; ++i) {
        check_window_on_profile(tool, profile.length(), positions[i], i);
        double attenuation = 0.0;
        for (int j = 0; j < tool.k(); ++j) {
            const auto overlaps =
                cell_overlaps(profile.step_length(), profile.size(), cell_extent(tool, positions[i], j));
            double tbar = 0.0;
            for (const auto& o : overlaps) {
                const double piece = joints[o.piece] ? spec.joint_damping * t[o.piece] : t[o.piece];
                tbar += o.fraction * piece;
            }
            attenuation += model.w[static_cast<std::size_t>(j)] * tbar;
        }
        const double eps_amp = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(amp_rng) : 0.0;
        const double eps_phase = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(phase_rng) : 0.0;
        y[i] = model.y0 + attenuation + eps_amp;
        phase[i] = -attenuation + eps_phase;
    }
    return MeasurementSeries(std::move(positions), std::move(y), std::move(phase));
}

}  // namespace rfec
