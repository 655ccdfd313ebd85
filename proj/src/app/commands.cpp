#include "rfec/app/commands.hpp"

#include <string>

#include "rfec/design.hpp"
#include "rfec/errors.hpp"
#include "rfec/forward.hpp"
#include "rfec/inverse.hpp"
#include "rfec/lasso.hpp"

namespace rfec::app {

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

struct ModeFit {
    io::FitReportRow row;
    CvCurve curve;
};

ModeFit fit_mode(const RunConfig& cfg, const Eigen::MatrixXd& T, const MeasurementSeries& y,
                 const PipeProfile& profile, DatasetMode mode) {
    MaskedDataset data = mask_dataset(T, y, profile, cfg.tool, mode);
    const auto min_rows = static_cast<std::size_t>(std::max(2 * cfg.lasso.folds, cfg.tool.k() + 2));
    auto require_rows = [&](std::size_t rows) {
        if (rows < min_rows) {
            throw InvalidArgument("dataset (" + std::string(1, to_char(mode)) + ") keeps " +
                                  std::to_string(rows) + " rows after masking; at least " +
                                  std::to_string(min_rows) + " are needed");
        }
    };
    require_rows(data.kept.size());

    ModeFit out;
    out.row.dataset = to_char(mode);
    out.curve = cross_validate(data.T, data.y, cfg.lasso);
    LassoFit fit = fit_lasso(data.T, data.y, out.curve.chosen_alpha, cfg.lasso);

    if (cfg.outlier_filter == OutlierFilter::Chauvenet) {
        const Eigen::VectorXd resid = data.y - predict(fit.model, data.T);
        const std::vector<bool> keep =
            chauvenet_filter(std::span<const double>(resid.data(), static_cast<std::size_t>(resid.size())));
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (keep[i]) rows.push_back(static_cast<Eigen::Index>(i));
        }
        out.row.outliers_removed = keep.size() - rows.size();
        if (out.row.outliers_removed > 0) {
            require_rows(rows.size());
            const Eigen::MatrixXd T_kept = data.T(rows, Eigen::all);
            const Eigen::VectorXd y_kept = data.y(rows);
            out.curve = cross_validate(T_kept, y_kept, cfg.lasso);
            fit = fit_lasso(T_kept, y_kept, out.curve.chosen_alpha, cfg.lasso);
        }
    }
    if (!fit.converged) {
        throw NumericalError("coordinate descent did not converge for dataset (" +
                             std::string(1, to_char(mode)) + ")");
    }
    out.row.rows = data.kept.size() - out.row.outliers_removed;
    out.row.model = fit.model;
    return out;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
    ensure_dir(out_dir);
    const PipeProfile profile = synth_profile(cfg.synthesis);
    const MeasurementSeries series = synth_measurements(profile, cfg.tool, cfg.synthesis);
    io::write_profile(out_dir / kProfileFile, profile);
    io::write_measurements(out_dir / kMeasurementsFile, series);
}

FitDirectResult cmd_fit_direct(const RunConfig& cfg, const fs::path& measurements_path,
                               const fs::path& profile_path, const fs::path& out_dir) {
    const MeasurementSeries series = io::read_measurements(measurements_path);
    const PipeProfile profile = io::read_profile(profile_path);
    ensure_dir(out_dir);
    const Eigen::MatrixXd T = build_T(profile, cfg.tool, series.position());

    FitDirectResult result;
    for (DatasetMode mode : {DatasetMode::All, DatasetMode::NoReceiverJoints, DatasetMode::NoJoints}) {
        ModeFit fit = fit_mode(cfg, T, series, profile, mode);
        if (mode == cfg.mode) {
            result.model = fit.row.model;
            result.curve = fit.curve;
        }
        result.report.push_back(std::move(fit.row));
    }
    io::write_model(out_dir / kModelFile, result.model);
    io::write_cv_curve(out_dir / kCvCurveFile, result.curve);
    io::write_fit_report(out_dir / kFitReportFile, result.report);
    return result;
}

InvertResult cmd_invert(const RunConfig& cfg, const fs::path& model_path,
                        const fs::path& measurements_path,
                        const std::optional<fs::path>& truth_profile_path, const fs::path& out_dir,
                        bool force_dof) {
    const DirectModel model = io::read_model(model_path);
    const MeasurementSeries series = io::read_measurements(measurements_path);
    std::optional<PipeProfile> truth;
    if (truth_profile_path) truth = io::read_profile(*truth_profile_path);
    if (model.k() != static_cast<std::size_t>(cfg.tool.k())) {
        throw InvalidArgument("model has " + std::to_string(model.k()) +
                              " weights but the configured tool has k = " + std::to_string(cfg.tool.k()));
    }
    ensure_dir(out_dir);

    const std::size_t n = truth ? truth->size() : cfg.synthesis.n_pieces;
    const double step = truth ? truth->step_length() : cfg.synthesis.step_length;
    std::vector<double> centres(n);
    for (std::size_t i = 0; i < n; ++i) centres[i] = (static_cast<double>(i) + 0.5) * step;

    const InverseSystem sys = build_W(model, cfg.tool, centres, step, series.position());
    const DofCheck dof = check_dof(sys.m(), sys.n());
    if (!dof.warnings.empty() && !force_dof) {
        std::string msg = "degrees-of-freedom check failed:";
        for (const auto& w : dof.warnings) msg += " " + w + ";";
        throw NumericalError(msg + " pass --force-dof to solve anyway");
    }

    InvertResult result;
    result.solution = solve_inverse(sys, series, cfg.inverse);
    io::write_reconstruction(out_dir / kReconstructionFile, centres, result.solution.thickness,
                             truth ? &*truth : nullptr);

    io::EvalReport report;
    report.guard_pieces = cfg.guard_pieces;
    report.solution = result.solution;
    report.m = sys.m();
    report.n = sys.n();
    report.warnings = result.solution.warnings;
    if (truth) {
        result.errors = evaluate_reconstruction(result.solution.thickness, *truth, cfg.guard_pieces);
        report.errors = result.errors;
    }
    io::write_eval_report(out_dir / kEvalReportFile, report);
    return result;
}

ReconstructionErrors cmd_eval(const RunConfig& cfg, const fs::path& reconstruction_path,
                              const fs::path& profile_path, const fs::path& out_dir) {
    const io::ReconstructionRecord rec = io::read_reconstruction(reconstruction_path);
    const PipeProfile truth = io::read_profile(profile_path);
    ensure_dir(out_dir);
    const ReconstructionErrors errors = evaluate_reconstruction(rec.estimate, truth, cfg.guard_pieces);
    io::EvalReport report;
    report.errors = errors;
    report.guard_pieces = cfg.guard_pieces;
    io::write_eval_report(out_dir / kEvalReportFile, report);
    return errors;
}

}  // namespace rfec::app
