#pragma once

// Least-squares reconstruction of the thickness profile from the banded
// inverse system y = W t + y0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rfec/core.hpp"

namespace rfec {

struct DofCheck {
    long dof = 0;  ///< m - n
    std::vector<std::string> warnings;
};

/// dof = m - n; warns when dof < 10 or m < 10 n.
DofCheck check_dof(std::size_t m, std::size_t n);

struct InverseOptions {
    /// Largest accepted condition number of W^T W.
    double max_condition = 1e12;
};

struct InverseSolution {
    std::vector<double> thickness;  ///< mm, one per piece
    double residual_norm = 0.0;     ///< ||W t - (y - y0)||
    double condition = 0.0;         ///< estimated condition number of W^T W
    long dof = 0;
    std::vector<std::string> warnings;
};

/// Minimises ||W t - (y - y0)||^2 with a Givens QR factorisation that keeps
/// the band of W. Throws NumericalError when m <= n or when W^T W is too
/// badly conditioned.
InverseSolution solve_inverse(const InverseSystem& sys, std::span<const double> y,
                              const InverseOptions& opts = {});
InverseSolution solve_inverse(const InverseSystem& sys, const MeasurementSeries& y,
                              const InverseOptions& opts = {});

/// Upper-triangular band factor R of W (W = Q R), stored row-wise with
/// `at(i, d) == R(i, i + d)`.
class BandedTriangular {
public:
    BandedTriangular(std::size_t n, std::size_t bandwidth);

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return bw_; }
    double& at(std::size_t i, std::size_t d) { return data_[i * bw_ + d]; }
    double at(std::size_t i, std::size_t d) const { return data_[i * bw_ + d]; }

    /// Solves R x = b in place.
    void solve_upper(std::vector<double>& b) const;
    /// Solves R^T x = b in place.
    void solve_lower_transpose(std::vector<double>& b) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> multiply_transpose(std::span<const double> x) const;

    /// Estimated 2-norm condition number of R (power and inverse iteration).
    double condition_estimate() const;

private:
    std::size_t n_;
    std::size_t bw_;
    std::vector<double> data_;
};

struct BandedQr {
    BandedTriangular R;
    std::vector<double> qty;  ///< first n entries of Q^T b
    double discarded_norm = 0.0;
};

/// Row-by-row Givens reduction of the banded system (W, b).
BandedQr banded_qr(const InverseSystem& sys, std::span<const double> b);

struct ReconstructionErrors {
    double mse_all = 0.0;
    double rmse_all = 0.0;
    double mse_excluding_joints = 0.0;
    double rmse_excluding_joints = 0.0;
    std::size_t pieces_excluded = 0;
};

/// Piecewise errors of `t_hat` against `truth`, mm. The joint-free variant
/// also drops `guard_pieces` neighbours on each side of every joint piece.
ReconstructionErrors evaluate_reconstruction(std::span<const double> t_hat,
                                             const PipeProfile& truth,
                                             std::size_t guard_pieces = 1);

}  // namespace rfec
