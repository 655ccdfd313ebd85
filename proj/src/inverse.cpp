#include "rfec/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rfec/errors.hpp"

namespace rfec {

DofCheck check_dof(std::size_t m, std::size_t n) {
    DofCheck out;
    out.dof = static_cast<long>(m) - static_cast<long>(n);
    if (out.dof < 10) {
        out.warnings.push_back("dof below 10 (m - n = " + std::to_string(out.dof) + ")");
    }
    if (m < 10 * n) {
        out.warnings.push_back("m below 10n (m = " + std::to_string(m) + ", n = " +
                               std::to_string(n) + ")");
    }
    return out;
}

BandedTriangular::BandedTriangular(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(std::max<std::size_t>(bandwidth, 1)), data_(n * bw_, 0.0) {}

void BandedTriangular::solve_upper(std::vector<double>& b) const {
    for (std::size_t ii = n_; ii-- > 0;) {
        double acc = b[ii];
        const std::size_t width = std::min(bw_, n_ - ii);
        for (std::size_t d = 1; d < width; ++d) acc -= at(ii, d) * b[ii + d];
        b[ii] = acc / at(ii, 0);
    }
}

void BandedTriangular::solve_lower_transpose(std::vector<double>& b) const {
    // Column i of R^T holds row i of R, so each solved entry is pushed
    // forward into the later equations.
    for (std::size_t i = 0; i < n_; ++i) {
        b[i] /= at(i, 0);
        const std::size_t width = std::min(bw_, n_ - i);
        for (std::size_t d = 1; d < width; ++d) b[i + d] -= at(i, d) * b[i];
    }
}

std::vector<double> BandedTriangular::multiply(std::span<const double> x) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t width = std::min(bw_, n_ - i);
        double acc = 0.0;
        for (std::size_t d = 0; d < width; ++d) acc += at(i, d) * x[i + d];
        out[i] = acc;
    }
    return out;
}

std::vector<double> BandedTriangular::multiply_transpose(std::span<const double> x) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t width = std::min(bw_, n_ - i);
        for (std::size_t d = 0; d < width; ++d) out[i + d] += at(i, d) * x[i];
    }
    return out;
}

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void scale(std::vector<double>& v, double f) {
    for (double& x : v) x *= f;
}

std::vector<double> start_vector(std::size_t n) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    scale(v, 1.0 / norm2(v));
    return v;
}

}  // namespace

double BandedTriangular::condition_estimate() const {
    if (n_ == 0) return 1.0;
    double diag_max = 0.0;
    for (std::size_t i = 0; i < n_; ++i) diag_max = std::max(diag_max, std::abs(at(i, 0)));
    for (std::size_t i = 0; i < n_; ++i) {
        if (!(std::abs(at(i, 0)) > 1e-300) || std::abs(at(i, 0)) < 1e-15 * diag_max) {
            return std::numeric_limits<double>::infinity();
        }
    }
    constexpr int kMaxIter = 2000;
    constexpr double kRelTol = 1e-10;

    // Largest singular value: power iteration on R^T R.
    std::vector<double> v = start_vector(n_);
    double sigma_max = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
        std::vector<double> w = multiply_transpose(multiply(v));
        const double lambda = norm2(w);
        scale(w, 1.0 / lambda);
        v = std::move(w);
        const double next = std::sqrt(lambda);
        const bool done = std::abs(next - sigma_max) <= kRelTol * next;
        sigma_max = next;
        if (done) break;
    }

    // Smallest singular value: inverse iteration with two triangular solves.
    v = start_vector(n_);
    double sigma_min = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxIter; ++it) {
        std::vector<double> w = v;
        solve_lower_transpose(w);
        solve_upper(w);
        const double mu = norm2(w);
        if (!std::isfinite(mu)) return std::numeric_limits<double>::infinity();
        scale(w, 1.0 / mu);
        v = std::move(w);
        const double next = 1.0 / std::sqrt(mu);
        const bool done = std::abs(next - sigma_min) <= kRelTol * next;
        sigma_min = next;
        if (done) break;
    }
    return sigma_max / sigma_min;
}

BandedQr banded_qr(const InverseSystem& sys, std::span<const double> b) {
    if (b.size() != sys.m()) throw InvalidArgument("banded_qr: right-hand side length differs from m");
    const std::size_t n = sys.n();
    const std::size_t bw = std::max<std::size_t>(sys.bandwidth(), 1);
    BandedQr out{BandedTriangular(n, bw), std::vector<double>(n, 0.0), 0.0};
    std::vector<bool> filled(n, false);
    std::vector<double> row(bw);
    double discarded = 0.0;

    for (std::size_t i = 0; i < sys.m(); ++i) {
        const BandRow& src = sys.rows()[i];
        std::fill(row.begin(), row.end(), 0.0);
        std::copy(src.values.begin(), src.values.end(), row.begin());
        double rhs = b[i];
        std::size_t col = src.start;
        std::size_t live = src.values.size();  // entries of `row` that may be nonzero

        while (live > 0 && col < n) {
            if (row[0] != 0.0) {
                if (!filled[col]) {
                    for (std::size_t d = 0; d < bw; ++d) out.R.at(col, d) = row[d];
                    out.qty[col] = rhs;
                    filled[col] = true;
                    rhs = 0.0;
                    live = 0;
                    break;
                }
                const double r0 = out.R.at(col, 0);
                const double h = std::hypot(r0, row[0]);
                const double c = r0 / h;
                const double s = row[0] / h;
                for (std::size_t d = 0; d < bw; ++d) {
                    const double top = out.R.at(col, d);
                    const double bottom = row[d];
                    out.R.at(col, d) = c * top + s * bottom;
                    row[d] = -s * top + c * bottom;
                }
                const double top = out.qty[col];
                out.qty[col] = c * top + s * rhs;
                rhs = -s * top + c * rhs;
                // Rotation with a full R row may extend the live part.
                live = bw;
            }
            std::rotate(row.begin(), row.begin() + 1, row.end());
            row.back() = 0.0;
            --live;
            ++col;
        }
        discarded += rhs * rhs;
    }
    out.discarded_norm = std::sqrt(discarded);
    return out;
}

InverseSolution solve_inverse(const InverseSystem& sys, std::span<const double> y,
                              const InverseOptions& opts) {
    const std::size_t m = sys.m();
    const std::size_t n = sys.n();
    if (y.size() != m) {
        throw InvalidArgument("solve_inverse: " + std::to_string(y.size()) +
                              " measurements for a system with m = " + std::to_string(m));
    }
    if (m <= n) {
        throw NumericalError("underdetermined system (m = " + std::to_string(m) + ", n = " +
                             std::to_string(n) + ")");
    }
    std::vector<double> b(m);
    for (std::size_t i = 0; i < m; ++i) b[i] = y[i] - sys.y0();

    BandedQr qr = banded_qr(sys, b);
    const double cond_r = qr.R.condition_estimate();
    const double cond = cond_r * cond_r;
    if (!(cond <= opts.max_condition)) {
        throw NumericalError("inverse system is ill-conditioned (cond(W^T W) ~ " +
                             std::to_string(cond) + "); use fewer, longer profile pieces");
    }

    InverseSolution out;
    out.thickness = std::move(qr.qty);
    qr.R.solve_upper(out.thickness);
    out.condition = cond;

    const std::vector<double> fitted = sys.apply(out.thickness);
    double rs = 0.0;
    for (std::size_t i = 0; i < m; ++i) rs += (fitted[i] - b[i]) * (fitted[i] - b[i]);
    out.residual_norm = std::sqrt(rs);

    DofCheck dof = check_dof(m, n);
    out.dof = dof.dof;
    out.warnings = std::move(dof.warnings);
    return out;
}

InverseSolution solve_inverse(const InverseSystem& sys, const MeasurementSeries& y,
                              const InverseOptions& opts) {
    return solve_inverse(sys, y.log_amplitude(), opts);
}

ReconstructionErrors evaluate_reconstruction(std::span<const double> t_hat,
                                             const PipeProfile& truth, std::size_t guard_pieces) {
    const std::size_t n = truth.size();
    if (t_hat.size() != n) {
        throw InvalidArgument("evaluate_reconstruction: " + std::to_string(t_hat.size()) +
                              " estimates for " + std::to_string(n) + " pieces");
    }
    std::vector<bool> excluded(n, false);
    const auto& joints = truth.joint_mask();
    for (std::size_t i = 0; i < n; ++i) {
        if (!joints[i]) continue;
        const std::size_t lo = i >= guard_pieces ? i - guard_pieces : 0;
        const std::size_t hi = std::min(n - 1, i + guard_pieces);
        for (std::size_t j = lo; j <= hi; ++j) excluded[j] = true;
    }

    const auto t = truth.thickness();
    double ss_all = 0.0;
    double ss_kept = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = (t_hat[i] - t[i]) * (t_hat[i] - t[i]);
        ss_all += e;
        if (!excluded[i]) {
            ss_kept += e;
            ++kept;
        }
    }
    ReconstructionErrors out;
    out.mse_all = ss_all / static_cast<double>(n);
    out.rmse_all = std::sqrt(out.mse_all);
    out.pieces_excluded = n - kept;
    if (kept > 0) {
        out.mse_excluding_joints = ss_kept / static_cast<double>(kept);
    } else {
        out.mse_excluding_joints = std::numeric_limits<double>::quiet_NaN();
    }
    out.rmse_excluding_joints = std::sqrt(out.mse_excluding_joints);
    return out;
}

}  // namespace rfec
