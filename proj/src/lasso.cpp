#include "rfec/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rfec/errors.hpp"

namespace rfec {

void LassoOptions::validate() const {
    if (alpha_count < 2) throw InvalidArgument("lasso: alpha_count must be at least 2");
    if (!(alpha_min_ratio > 0.0 && alpha_min_ratio < 1.0)) {
        throw InvalidArgument("lasso: alpha_min_ratio must lie in (0, 1)");
    }
    if (max_iterations < 1) throw InvalidArgument("lasso: max_iterations must be positive");
    if (!(tolerance > 0.0)) throw InvalidArgument("lasso: tolerance must be positive");
    if (folds < 2) throw InvalidArgument("lasso: folds must be at least 2");
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

namespace {

void check_inputs(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
    if (T.rows() != y.size()) {
        throw InvalidArgument("lasso: T has " + std::to_string(T.rows()) + " rows but y has " +
                              std::to_string(y.size()));
    }
    if (T.rows() < 2) throw InvalidArgument("lasso: at least 2 samples are required");
    if (T.cols() < 1) throw InvalidArgument("lasso: T needs an intercept column");
    if (!T.allFinite() || !y.allFinite()) throw InvalidArgument("lasso: non-finite input");
    if (!(T.col(0).array() == 1.0).all()) {
        throw InvalidArgument("lasso: the first column of T must be all ones");
    }
}

/// Centred response and standardised features. Columns with no spread are
/// flagged and kept at zero weight.
struct Standardized {
    Eigen::MatrixXd Z;
    Eigen::VectorXd yc;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
    std::vector<bool> usable;
    double y_mean = 0.0;
    std::vector<std::string> warnings;
    // Used only to certify candidate solutions, not by the descent itself.
    Eigen::MatrixXd gram;
    Eigen::VectorXd zty;

    Standardized(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
        const Eigen::Index m = T.rows();
        const Eigen::Index p = T.cols() - 1;
        Z = T.rightCols(p);
        mean = Z.colwise().mean().transpose();
        scale.resize(p);
        usable.assign(static_cast<std::size_t>(p), true);
        for (Eigen::Index j = 0; j < p; ++j) {
            Z.col(j).array() -= mean(j);
            const double sd = std::sqrt(Z.col(j).squaredNorm() / static_cast<double>(m));
            if (!(sd > 1e-12 * std::max(1.0, std::abs(mean(j))))) {
                usable[static_cast<std::size_t>(j)] = false;
                scale(j) = 1.0;
                Z.col(j).setZero();
                warnings.push_back("feature column " + std::to_string(j + 1) +
                                   " has zero variance; weight fixed at 0");
            } else {
                scale(j) = sd;
                Z.col(j) /= sd;
            }
        }
        y_mean = y.mean();
        yc = y.array() - y_mean;
        gram = Z.transpose() * Z;
        zty = Z.transpose() * yc;
    }

    Eigen::Index features() const { return Z.cols(); }

    double objective(const Eigen::VectorXd& residual, const Eigen::VectorXd& beta,
                     double alpha) const {
        return residual.squaredNorm() + alpha * beta.lpNorm<1>();
    }

    double alpha_max() const {
        double best = 0.0;
        for (Eigen::Index j = 0; j < features(); ++j) {
            if (!usable[static_cast<std::size_t>(j)]) continue;
            best = std::max(best, std::abs(2.0 * Z.col(j).dot(yc)));
        }
        return best;
    }

    DirectModel to_model(const Eigen::VectorXd& beta, double alpha) const {
        DirectModel model;
        model.alpha = alpha;
        model.w.resize(static_cast<std::size_t>(features()));
        double offset = 0.0;
        for (Eigen::Index j = 0; j < features(); ++j) {
            const double w = usable[static_cast<std::size_t>(j)] ? beta(j) / scale(j) : 0.0;
            model.w[static_cast<std::size_t>(j)] = w;
            offset += w * mean(j);
        }
        model.y0 = y_mean - offset;
        return model;
    }
};

// Active-set sweeps between two optimality checks.
constexpr int kPolishEvery = 5;

struct DescentResult {
    Eigen::VectorXd beta;
    bool converged = false;
    bool certified = false;
    int iterations = 0;
    std::vector<double> history;
};

/// Exact minimiser on the active set of `beta`, accepted only if it keeps
/// the signs and leaves every inactive coordinate inside its subgradient
/// interval; the result then satisfies the optimality conditions exactly.
bool polish(const Standardized& s, double alpha, Eigen::VectorXd& beta) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta(j) != 0.0) active.push_back(j);
    }
    if (active.empty()) {
        // All-zero model: optimal iff every |2 Z_j^T yc| <= alpha.
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            if (std::abs(2.0 * s.zty(j)) > alpha * (1.0 + 1e-9)) return false;
        }
        return true;
    }
    const auto a = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd gram(a, a);
    Eigen::VectorXd rhs(a);
    for (Eigen::Index i = 0; i < a; ++i) {
        const Eigen::Index ji = active[static_cast<std::size_t>(i)];
        for (Eigen::Index l = 0; l < a; ++l) gram(i, l) = s.gram(ji, active[static_cast<std::size_t>(l)]);
        const double sign = beta(ji) > 0.0 ? 1.0 : -1.0;
        // Stationarity on the active set: G_AA b = Z_A^T yc - alpha/2 * sign.
        rhs(i) = s.zty(ji) - 0.5 * alpha * sign;
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) return false;
    const Eigen::VectorXd bA = ldlt.solve(rhs);
    if (!bA.allFinite()) return false;

    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(beta.size());
    for (Eigen::Index i = 0; i < a; ++i) {
        const Eigen::Index ji = active[static_cast<std::size_t>(i)];
        if (bA(i) * beta(ji) <= 0.0) return false;
        candidate(ji) = bA(i);
    }
    // Z^T r = Z^T yc - G b.
    const Eigen::VectorXd ztr = s.zty - s.gram * candidate;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (candidate(j) != 0.0 || !s.usable[static_cast<std::size_t>(j)]) continue;
        if (std::abs(2.0 * ztr(j)) > alpha * (1.0 + 1e-9)) return false;
    }
    beta = std::move(candidate);
    return true;
}

/// Cyclic coordinate descent on the residual.
DescentResult coordinate_descent(const Standardized& s, double alpha, Eigen::VectorXd beta,
                                 const LassoOptions& opts) {
    const Eigen::Index p = s.features();
    const double m = static_cast<double>(s.Z.rows());
    Eigen::VectorXd r = s.yc - s.Z * beta;
    DescentResult out;

    auto update = [&](Eigen::Index j) {
        if (!s.usable[static_cast<std::size_t>(j)]) return 0.0;
        const double old = beta(j);
        // ||Z_j||^2 == m for a standardised column.
        const double rho = s.Z.col(j).dot(r) + m * old;
        const double next = soft_threshold(rho, 0.5 * alpha) / m;
        if (next != old) {
            r.noalias() -= (next - old) * s.Z.col(j);
            beta(j) = next;
        }
        return std::abs(next - old);
    };

    auto accept_polished = [&]() {
        Eigen::VectorXd trial = beta;
        if (!polish(s, alpha, trial)) return false;
        beta = std::move(trial);
        r = s.yc - s.Z * beta;
        out.history.push_back(s.objective(r, beta, alpha));
        out.certified = true;
        return true;
    };

    while (out.iterations < opts.max_iterations) {
        double delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) delta = std::max(delta, update(j));
        ++out.iterations;
        out.history.push_back(s.objective(r, beta, alpha));
        if (delta < opts.tolerance) {
            out.converged = true;
            break;
        }
        // Once the active set is right the exact solve certifies optimality.
        if (accept_polished()) {
            out.converged = true;
            break;
        }
        // Iterate on the current active set until it settles, then go back
        // to a full sweep to check for new entries.
        for (int inner = 1; out.iterations < opts.max_iterations; ++inner) {
            double active_delta = 0.0;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (beta(j) != 0.0) active_delta = std::max(active_delta, update(j));
            }
            ++out.iterations;
            out.history.push_back(s.objective(r, beta, alpha));
            if (active_delta < opts.tolerance) break;
            if (inner % kPolishEvery == 0 && accept_polished()) break;
        }
        if (out.certified) {
            out.converged = true;
            break;
        }
    }
    if (!out.certified) accept_polished();
    out.beta = std::move(beta);
    return out;
}

LassoFit finish(const Standardized& s, const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                double alpha, DescentResult&& d) {
    LassoFit fit;
    fit.model = s.to_model(d.beta, alpha);
    const FitMetrics fm = metrics(y, predict(fit.model, T));
    fit.model.mse = fm.mse;
    fit.model.r2 = fm.r2;
    fit.converged = d.converged;
    fit.iterations = d.iterations;
    fit.objective_history = std::move(d.history);
    fit.warnings = s.warnings;
    if (!fit.converged) {
        fit.warnings.push_back("coordinate descent stopped after " + std::to_string(d.iterations) +
                               " sweeps without converging at alpha = " + std::to_string(alpha));
    }
    return fit;
}

std::vector<double> log_grid(double alpha_max, const LassoOptions& opts) {
    std::vector<double> grid(static_cast<std::size_t>(opts.alpha_count));
    const double log_hi = std::log(alpha_max);
    const double log_lo = std::log(alpha_max * opts.alpha_min_ratio);
    const auto last = static_cast<double>(opts.alpha_count - 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = std::exp(log_hi + (log_lo - log_hi) * static_cast<double>(i) / last);
    }
    grid.front() = alpha_max;
    grid.back() = alpha_max * opts.alpha_min_ratio;
    return grid;
}

}  // namespace

double lasso_alpha_max(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
    check_inputs(T, y);
    return Standardized(T, y).alpha_max();
}

LassoFit fit_lasso(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, double alpha,
                   const LassoOptions& opts) {
    check_inputs(T, y);
    opts.validate();
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw InvalidArgument("lasso: alpha must be non-negative and finite");
    }
    const Standardized s(T, y);
    auto d = coordinate_descent(s, alpha, Eigen::VectorXd::Zero(s.features()), opts);
    return finish(s, T, y, alpha, std::move(d));
}

std::vector<double> alpha_path(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                               const LassoOptions& opts) {
    check_inputs(T, y);
    opts.validate();
    double amax = Standardized(T, y).alpha_max();
    // A constant response gives alpha_max = 0; any grid then yields the
    // same all-zero model.
    if (!(amax > 0.0)) amax = 1.0;
    return log_grid(amax, opts);
}

std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                                 const std::vector<double>& alphas, const LassoOptions& opts) {
    check_inputs(T, y);
    opts.validate();
    const Standardized s(T, y);
    std::vector<LassoFit> fits;
    fits.reserve(alphas.size());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(s.features());
    for (double alpha : alphas) {
        auto d = coordinate_descent(s, alpha, beta, opts);
        beta = d.beta;
        fits.push_back(finish(s, T, y, alpha, std::move(d)));
    }
    return fits;
}

std::vector<int> assign_folds(std::size_t m, const LassoOptions& opts) {
    const auto folds = static_cast<std::size_t>(opts.folds);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (opts.fold_strategy == FoldStrategy::Shuffled) {
        std::mt19937_64 rng(opts.fold_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    // Fold f takes positions [f*m/folds, (f+1)*m/folds) of the ordering.
    std::vector<int> fold_of(m);
    for (std::size_t f = 0; f < folds; ++f) {
        for (std::size_t i = f * m / folds; i < (f + 1) * m / folds; ++i) {
            fold_of[order[i]] = static_cast<int>(f);
        }
    }
    return fold_of;
}

CvCurve cross_validate(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                       const LassoOptions& opts) {
    check_inputs(T, y);
    opts.validate();
    const auto m = static_cast<std::size_t>(T.rows());
    const auto folds = static_cast<std::size_t>(opts.folds);
    if (m / folds < 2) {
        throw InvalidArgument("cross_validate: " + std::to_string(m) + " samples cannot fill " +
                              std::to_string(folds) + " folds with at least 2 samples each");
    }

    CvCurve curve;
    curve.alphas = alpha_path(T, y, opts);
    const std::size_t n_alpha = curve.alphas.size();
    const std::vector<int> fold_of = assign_folds(m, opts);

    std::vector<std::vector<double>> fold_mse(folds, std::vector<double>(n_alpha, 0.0));
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (std::size_t i = 0; i < m; ++i) {
            (fold_of[i] == static_cast<int>(f) ? test : train).push_back(static_cast<Eigen::Index>(i));
        }
        const Eigen::MatrixXd T_train = T(train, Eigen::all);
        const Eigen::VectorXd y_train = y(train);
        const Eigen::MatrixXd T_test = T(test, Eigen::all);
        const Eigen::VectorXd y_test = y(test);

        const auto fits = lasso_path(T_train, y_train, curve.alphas, opts);
        for (std::size_t a = 0; a < n_alpha; ++a) {
            const Eigen::VectorXd resid = y_test - predict(fits[a].model, T_test);
            fold_mse[f][a] = resid.squaredNorm() / static_cast<double>(resid.size());
        }
    }

    curve.mean_mse.assign(n_alpha, 0.0);
    curve.se_mse.assign(n_alpha, 0.0);
    for (std::size_t a = 0; a < n_alpha; ++a) {
        double mean = 0.0;
        for (std::size_t f = 0; f < folds; ++f) mean += fold_mse[f][a];
        mean /= static_cast<double>(folds);
        double ss = 0.0;
        for (std::size_t f = 0; f < folds; ++f) ss += (fold_mse[f][a] - mean) * (fold_mse[f][a] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(folds - 1));
        curve.mean_mse[a] = mean;
        curve.se_mse[a] = sd / std::sqrt(static_cast<double>(folds));
    }

    curve.min_index = static_cast<std::size_t>(
        std::min_element(curve.mean_mse.begin(), curve.mean_mse.end()) - curve.mean_mse.begin());
    const double threshold = curve.mean_mse[curve.min_index] + curve.se_mse[curve.min_index];
    // Alphas are decreasing, so the first admissible index is the sparsest.
    for (std::size_t a = 0; a < n_alpha; ++a) {
        if (curve.mean_mse[a] <= threshold) {
            curve.chosen_index = a;
            break;
        }
    }
    curve.chosen_alpha = curve.alphas[curve.chosen_index];
    return curve;
}

DirectModel fit_ols(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
    check_inputs(T, y);
    if (T.rows() < T.cols()) {
        throw NumericalError("fit_ols: fewer samples than parameters; use LASSO instead");
    }
    const Eigen::VectorXd sv = T.jacobiSvd().singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || (smax / smin) * (smax / smin) > 1e12) {
        throw NumericalError("fit_ols: T^T T is rank-deficient or ill-conditioned; use LASSO instead");
    }
    const Eigen::VectorXd theta = T.colPivHouseholderQr().solve(y);
    DirectModel model;
    model.y0 = theta(0);
    model.w.assign(theta.data() + 1, theta.data() + theta.size());
    const FitMetrics fm = metrics(y, T * theta);
    model.mse = fm.mse;
    model.r2 = fm.r2;
    return model;
}

Eigen::VectorXd predict(const DirectModel& model, const Eigen::MatrixXd& T) {
    if (static_cast<std::size_t>(T.cols()) != model.k() + 1) {
        throw InvalidArgument("predict: T has " + std::to_string(T.cols()) +
                              " columns but the model expects " + std::to_string(model.k() + 1));
    }
    const Eigen::Map<const Eigen::VectorXd> w(model.w.data(), static_cast<Eigen::Index>(model.k()));
    return (T.rightCols(T.cols() - 1) * w).array() + model.y0;
}

FitMetrics metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
    if (y.size() != y_hat.size()) throw InvalidArgument("metrics: length mismatch");
    if (y.size() < 2) throw InvalidArgument("metrics: at least 2 samples are required");
    FitMetrics out;
    const double n = static_cast<double>(y.size());
    const double ss_res = (y - y_hat).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    out.mse = ss_res / n;
    out.rmse = std::sqrt(out.mse);
    if (ss_tot > 0.0) {
        out.r2 = 1.0 - ss_res / ss_tot;
    } else {
        out.r2 = std::numeric_limits<double>::quiet_NaN();
        out.r2_defined = false;
    }
    return out;
}

}  // namespace rfec
