#pragma once

// The four workflow commands behind the `rfec` executable. Each reads and
// writes plain CSV files; output is a pure function of config and inputs.

#include <filesystem>
#include <optional>
#include <vector>

#include "rfec/app/config.hpp"
#include "rfec/app/csv_io.hpp"

namespace rfec::app {

namespace fs = std::filesystem;

inline constexpr const char* kProfileFile = "profile.csv";
inline constexpr const char* kMeasurementsFile = "measurements.csv";
inline constexpr const char* kModelFile = "model.csv";
inline constexpr const char* kCvCurveFile = "cvcurve.csv";
inline constexpr const char* kFitReportFile = "fit_report.csv";
inline constexpr const char* kReconstructionFile = "reconstruction.csv";
inline constexpr const char* kEvalReportFile = "eval_report.csv";

/// Writes profile.csv and measurements.csv into `out_dir`.
void cmd_synth(const RunConfig& cfg, const fs::path& out_dir);

struct FitDirectResult {
    std::vector<io::FitReportRow> report;  ///< datasets a, b, c in order
    DirectModel model;                     ///< fit for cfg.mode
    CvCurve curve;                         ///< cross-validation for cfg.mode
};

/// Fits the direct model on datasets a, b and c. Writes model.csv and
/// cvcurve.csv for cfg.mode and fit_report.csv for all three.
FitDirectResult cmd_fit_direct(const RunConfig& cfg, const fs::path& measurements_path,
                               const fs::path& profile_path, const fs::path& out_dir);

struct InvertResult {
    InverseSolution solution;
    std::optional<ReconstructionErrors> errors;
};

/// Reconstructs the profile from measurements with a fitted model. The piece
/// layout comes from `truth_profile_path` when given, otherwise from
/// cfg.synthesis. Writes reconstruction.csv and eval_report.csv.
InvertResult cmd_invert(const RunConfig& cfg, const fs::path& model_path,
                        const fs::path& measurements_path,
                        const std::optional<fs::path>& truth_profile_path, const fs::path& out_dir,
                        bool force_dof);

/// Scores reconstruction.csv against profile.csv; writes eval_report.csv.
ReconstructionErrors cmd_eval(const RunConfig& cfg, const fs::path& reconstruction_path,
                              const fs::path& profile_path, const fs::path& out_dir);

}  // namespace rfec::app
