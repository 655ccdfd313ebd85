#pragma once

// L1-regularised least squares for the direct sensor model.
//
// The solver minimises ||T w - y||^2 + alpha * ||w||_1 by cyclic coordinate
// descent. The intercept (column 0 of T) is not penalised and the feature
// columns are standardised to zero mean and unit variance before descent, so
// the penalty acts on standardised coefficients; returned weights are on the
// original scale. A fit also counts as converged once an exact solve on the
// current active set satisfies the optimality conditions.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfec/core.hpp"

namespace rfec {

enum class FoldStrategy { ContiguousBlocks, Shuffled };

struct LassoOptions {
    int alpha_count = 100;
    double alpha_min_ratio = 1e-4;
    int max_iterations = 10000;  ///< coordinate sweeps per fit
    double tolerance = 1e-8;     ///< largest standardised coefficient update
    int folds = 10;
    FoldStrategy fold_strategy = FoldStrategy::Shuffled;
    std::uint64_t fold_seed = 0;

    void validate() const;
};

struct LassoFit {
    DirectModel model;
    bool converged = false;
    int iterations = 0;
    /// Objective after each coordinate sweep, standardised scale.
    std::vector<double> objective_history;
    std::vector<std::string> warnings;
};

struct CvCurve {
    std::vector<double> alphas;  ///< strictly decreasing
    std::vector<double> mean_mse;
    std::vector<double> se_mse;
    double chosen_alpha = 0.0;
    std::size_t chosen_index = 0;
    std::size_t min_index = 0;
};

struct FitMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    /// False when y has zero spread; r2 is NaN in that case.
    bool r2_defined = true;
};

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

/// Smallest alpha for which every feature weight is zero:
/// max_c |2 X_c^T (y - mean(y))| over standardised columns.
double lasso_alpha_max(const Eigen::MatrixXd& T, const Eigen::VectorXd& y);

LassoFit fit_lasso(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, double alpha,
                   const LassoOptions& opts = {});

/// Log-spaced grid from lasso_alpha_max down to alpha_max * alpha_min_ratio.
std::vector<double> alpha_path(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                               const LassoOptions& opts = {});

/// Warm-started fits along `alphas` (which must be decreasing).
std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                                 const std::vector<double>& alphas, const LassoOptions& opts = {});

/// K-fold cross-validation over alpha_path() with the one-standard-error
/// rule: the chosen alpha is the largest whose mean held-out MSE does not
/// exceed the minimum plus that minimum's standard error.
CvCurve cross_validate(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                       const LassoOptions& opts = {});

/// Fold index of every row, following opts.fold_strategy.
std::vector<int> assign_folds(std::size_t m, const LassoOptions& opts);

/// Ordinary least squares with intercept, via column-pivoted QR.
DirectModel fit_ols(const Eigen::MatrixXd& T, const Eigen::VectorXd& y);

/// T * [y0; w].
Eigen::VectorXd predict(const DirectModel& model, const Eigen::MatrixXd& T);

FitMetrics metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

}  // namespace rfec
