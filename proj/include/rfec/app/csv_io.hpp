#pragma once

// Fixed-header CSV artifacts. Every reader checks the header row verbatim and
// rejects anything else.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfec/core.hpp"
#include "rfec/inverse.hpp"
#include "rfec/lasso.hpp"

namespace rfec::io {

namespace fs = std::filesystem;

inline constexpr std::string_view kProfileHeader = "piece_index,centre_position_m,thickness_mm,is_joint";
inline constexpr std::string_view kMeasurementsHeader = "position_m,log_amplitude,phase_rad";
inline constexpr std::string_view kModelHeader = "parameter,value";
inline constexpr std::string_view kCvCurveHeader = "alpha,mean_mse,se_mse";
inline constexpr std::string_view kReconstructionHeader =
    "piece_index,centre_position_m,thickness_mm_estimated";
inline constexpr std::string_view kReconstructionTruthHeader =
    "piece_index,centre_position_m,thickness_mm_estimated,thickness_mm_truth,is_joint";
inline constexpr std::string_view kEvalReportHeader = "metric,value";

/// 17 significant digits, enough to parse back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view context);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path);
void write_text(const fs::path& path, const std::string& content);

/// Header of the Table II style report for `k` weights.
std::string fit_report_header(std::size_t k);

struct FitReportRow {
    char dataset = 'a';
    std::size_t rows = 0;
    std::size_t outliers_removed = 0;
    DirectModel model;
};

struct ReconstructionRecord {
    std::vector<double> centre;
    std::vector<double> estimate;
};

void write_profile(const fs::path& path, const PipeProfile& profile);
PipeProfile read_profile(const fs::path& path);

void write_measurements(const fs::path& path, const MeasurementSeries& series);
MeasurementSeries read_measurements(const fs::path& path);

void write_model(const fs::path& path, const DirectModel& model);
DirectModel read_model(const fs::path& path);

void write_cv_curve(const fs::path& path, const CvCurve& curve);

void write_fit_report(const fs::path& path, const std::vector<FitReportRow>& rows);
std::vector<FitReportRow> read_fit_report(const fs::path& path);

/// Truth columns are written only when `truth` is given.
void write_reconstruction(const fs::path& path, std::span<const double> centres,
                          std::span<const double> estimate, const PipeProfile* truth);
ReconstructionRecord read_reconstruction(const fs::path& path);

struct EvalReport {
    std::optional<ReconstructionErrors> errors;
    std::size_t guard_pieces = 1;
    std::optional<InverseSolution> solution;  ///< only its diagnostics are written
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<std::string> warnings;
};

void write_eval_report(const fs::path& path, const EvalReport& report);
/// metric -> value text, in file order.
std::vector<std::pair<std::string, std::string>> read_eval_report(const fs::path& path);

}  // namespace rfec::io
