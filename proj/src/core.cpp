#include "rfec/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfec/errors.hpp"

namespace rfec {

MaterialProperties::MaterialProperties(double omega, double mu_r, double sigma)
    : omega_(omega), mu_r_(mu_r), mu_(mu_r * kMu0), sigma_(sigma) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw InvalidArgument("material: omega must be positive and finite");
    }
    if (!(mu_r > 0.0) || !std::isfinite(mu_r)) {
        throw InvalidArgument("material: mu_r must be positive and finite");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("material: sigma must be non-negative and finite");
    }
}

MaterialProperties MaterialProperties::from_frequency(double frequency_hz, double mu_r,
                                                      double sigma) {
    return MaterialProperties(2.0 * kPi * frequency_hz, mu_r, sigma);
}

namespace materials {
MaterialProperties cast_iron(double omega) { return MaterialProperties(omega, 4.96, 1.12e7); }
MaterialProperties copper(double omega) { return MaterialProperties(omega, 1.0, 5.99e7); }
MaterialProperties air(double omega) { return MaterialProperties(omega, 1.0, 10.0); }
}  // namespace materials

PipeProfile::PipeProfile(double step_length, std::vector<double> thickness,
                         std::vector<bool> joint_mask)
    : step_(step_length), thickness_(std::move(thickness)), joint_mask_(std::move(joint_mask)) {
    if (!(step_ > 0.0) || !std::isfinite(step_)) {
        throw InvalidArgument("profile: step_length must be positive");
    }
    if (thickness_.empty()) {
        throw InvalidArgument("profile: at least one piece is required");
    }
    if (joint_mask_.size() != thickness_.size()) {
        throw InvalidArgument("profile: joint_mask has " + std::to_string(joint_mask_.size()) +
                              " entries for " + std::to_string(thickness_.size()) + " pieces");
    }
    for (std::size_t i = 0; i < thickness_.size(); ++i) {
        if (!(thickness_[i] >= 0.0) || !std::isfinite(thickness_[i])) {
            throw InvalidArgument("profile: thickness of piece " + std::to_string(i) +
                                  " is negative or not finite");
        }
    }
}

PipeProfile::PipeProfile(double step_length, std::vector<double> thickness)
    : PipeProfile(step_length, thickness, std::vector<bool>(thickness.size(), false)) {}

std::vector<double> PipeProfile::centres() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = centre(i);
    return out;
}

bool PipeProfile::has_joints() const {
    return std::find(joint_mask_.begin(), joint_mask_.end(), true) != joint_mask_.end();
}

ToolGeometry::ToolGeometry(int k, double cell_pitch, CellRange exciter_cells,
                           CellRange receiver_cells, double sample_pitch)
    : k_(k),
      cell_pitch_(cell_pitch),
      exciter_(exciter_cells),
      receiver_(receiver_cells),
      sample_pitch_(sample_pitch) {
    if (k < 2) throw InvalidArgument("tool: k must be at least 2");
    if (!(cell_pitch > 0.0)) throw InvalidArgument("tool: cell_pitch must be positive");
    if (!(sample_pitch > 0.0)) throw InvalidArgument("tool: sample_pitch must be positive");
    auto valid = [k](const CellRange& r) { return r.first >= 1 && r.last <= k && r.first <= r.last; };
    if (!valid(exciter_)) throw InvalidArgument("tool: exciter_cells must be a non-empty subrange of [1, k]");
    if (!valid(receiver_)) throw InvalidArgument("tool: receiver_cells must be a non-empty subrange of [1, k]");
    if (exciter_.overlaps(receiver_)) {
        throw InvalidArgument("tool: exciter_cells and receiver_cells must be disjoint");
    }
}

MeasurementSeries::MeasurementSeries(std::vector<double> position,
                                     std::vector<double> log_amplitude,
                                     std::optional<std::vector<double>> phase)
    : position_(std::move(position)),
      log_amplitude_(std::move(log_amplitude)),
      phase_(std::move(phase)) {
    if (position_.size() != log_amplitude_.size()) {
        throw InvalidArgument("measurements: position and log_amplitude lengths differ");
    }
    if (phase_ && phase_->size() != position_.size()) {
        throw InvalidArgument("measurements: phase and position lengths differ");
    }
    if (position_.size() >= 2) {
        for (std::size_t i = 1; i < position_.size(); ++i) {
            if (!(position_[i] > position_[i - 1])) {
                throw InvalidArgument("measurements: positions must be strictly increasing (sample " +
                                      std::to_string(i) + ")");
            }
        }
        const double pitch =
            (position_.back() - position_.front()) / static_cast<double>(position_.size() - 1);
        for (std::size_t i = 0; i < position_.size(); ++i) {
            const double expected = position_.front() + static_cast<double>(i) * pitch;
            if (std::abs(position_[i] - expected) > 1e-9 * pitch) {
                throw InvalidArgument("measurements: positions are not uniformly spaced (sample " +
                                      std::to_string(i) + ")");
            }
        }
    }
}

InverseSystem::InverseSystem(std::vector<BandRow> rows, double y0, std::size_t n)
    : rows_(std::move(rows)), y0_(y0), n_(n) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].start + rows_[i].values.size() > n_) {
            throw InvalidArgument("inverse system: row " + std::to_string(i) +
                                  " extends past column " + std::to_string(n_));
        }
        if (i > 0 && rows_[i].start < rows_[i - 1].start) {
            throw InvalidArgument("inverse system: band start of row " + std::to_string(i) +
                                  " moves backwards");
        }
    }
}

std::size_t InverseSystem::bandwidth() const {
    std::size_t bw = 0;
    for (const auto& r : rows_) bw = std::max(bw, r.values.size());
    return bw;
}

std::vector<double> InverseSystem::apply(std::span<const double> t) const {
    if (t.size() != n_) throw InvalidArgument("inverse system: vector length does not match n");
    std::vector<double> out(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < r.values.size(); ++j) acc += r.values[j] * t[r.start + j];
        out[i] = acc;
    }
    return out;
}

std::vector<double> InverseSystem::apply_transpose(std::span<const double> v) const {
    if (v.size() != rows_.size()) {
        throw InvalidArgument("inverse system: vector length does not match m");
    }
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        for (std::size_t j = 0; j < r.values.size(); ++j) out[r.start + j] += r.values[j] * v[i];
    }
    return out;
}

std::vector<double> InverseSystem::dense() const {
    std::vector<double> out(rows_.size() * n_, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        std::copy(r.values.begin(), r.values.end(), out.begin() + i * n_ + r.start);
    }
    return out;
}

double attenuation_constant(const MaterialProperties& mat) {
    return std::sqrt(mat.omega() * mat.mu() * mat.sigma() / 2.0);
}

}  // namespace rfec
