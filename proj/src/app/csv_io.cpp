#include "rfec/app/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rfec/errors.hpp"

namespace rfec::io {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view context) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw IoError(std::string(context) + ": cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

void expect_header(const CsvTable& t, std::string_view expected, const fs::path& path) {
    const std::string got = join(t.header);
    if (got != expected) {
        throw IoError(path.string() + ": unknown header '" + got + "', expected '" +
                      std::string(expected) + "'");
    }
}

std::size_t parse_index(const std::string& text, const std::string& context) {
    std::size_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw IoError(context + ": cannot parse '" + text + "' as an index");
    }
    return value;
}

bool parse_flag(const std::string& text, const std::string& context) {
    if (text == "0") return false;
    if (text == "1") return true;
    throw IoError(context + ": expected 0 or 1, got '" + text + "'");
}

std::string where(const fs::path& path, std::size_t row, std::string_view column) {
    return path.string() + " row " + std::to_string(row + 2) + " column " + std::string(column);
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            t.header = split(line);
            first = false;
            continue;
        }
        auto fields = split(line);
        if (fields.size() != t.header.size()) {
            throw IoError(path.string() + " row " + std::to_string(t.rows.size() + 2) + ": expected " +
                          std::to_string(t.header.size()) + " fields, found " +
                          std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (first) throw IoError(path.string() + ": empty file");
    return t;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void write_profile(const fs::path& path, const PipeProfile& profile) {
    std::string s(kProfileHeader);
    s += '\n';
    const auto t = profile.thickness();
    for (std::size_t i = 0; i < profile.size(); ++i) {
        s += std::to_string(i) + ',' + format_double(profile.centre(i)) + ',' + format_double(t[i]) +
             ',' + (profile.joint_mask()[i] ? "1" : "0") + '\n';
    }
    write_text(path, s);
}

PipeProfile read_profile(const fs::path& path) {
    const CsvTable t = read_csv(path);
    expect_header(t, kProfileHeader, path);
    if (t.rows.empty()) throw IoError(path.string() + ": no pieces");
    std::vector<double> thickness;
    std::vector<bool> joints;
    double step = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (parse_index(row[0], where(path, r, "piece_index")) != r) {
            throw IoError(where(path, r, "piece_index") + ": pieces must be numbered 0, 1, 2, ...");
        }
        const double centre = parse_double(row[1], where(path, r, "centre_position_m"));
        if (r == 0) step = 2.0 * centre;
        if (!(step > 0.0) ||
            std::abs(centre - (static_cast<double>(r) + 0.5) * step) > 1e-9 * step) {
            throw IoError(where(path, r, "centre_position_m") +
                          ": centres must be (i + 0.5) * step_length");
        }
        thickness.push_back(parse_double(row[2], where(path, r, "thickness_mm")));
        joints.push_back(parse_flag(row[3], where(path, r, "is_joint")));
    }
    try {
        return PipeProfile(step, std::move(thickness), std::move(joints));
    } catch (const InvalidArgument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_measurements(const fs::path& path, const MeasurementSeries& series) {
    std::string s(kMeasurementsHeader);
    s += '\n';
    const auto x = series.position();
    const auto y = series.log_amplitude();
    const auto& phase = series.phase();
    for (std::size_t i = 0; i < series.size(); ++i) {
        s += format_double(x[i]) + ',' + format_double(y[i]) + ',';
        if (phase) s += format_double((*phase)[i]);
        s += '\n';
    }
    write_text(path, s);
}

MeasurementSeries read_measurements(const fs::path& path) {
    const CsvTable t = read_csv(path);
    expect_header(t, kMeasurementsHeader, path);
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> phase;
    bool has_phase = !t.rows.empty() && !t.rows.front()[2].empty();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        x.push_back(parse_double(row[0], where(path, r, "position_m")));
        y.push_back(parse_double(row[1], where(path, r, "log_amplitude")));
        if (has_phase != !row[2].empty()) {
            throw IoError(where(path, r, "phase_rad") + ": phase must be given for all rows or none");
        }
        if (has_phase) phase.push_back(parse_double(row[2], where(path, r, "phase_rad")));
    }
    try {
        if (has_phase) return MeasurementSeries(std::move(x), std::move(y), std::move(phase));
        return MeasurementSeries(std::move(x), std::move(y));
    } catch (const InvalidArgument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_model(const fs::path& path, const DirectModel& model) {
    std::string s(kModelHeader);
    s += '\n';
    s += "y0," + format_double(model.y0) + '\n';
    for (std::size_t c = 0; c < model.k(); ++c) {
        s += "w" + std::to_string(c + 1) + ',' + format_double(model.w[c]) + '\n';
    }
    s += "alpha," + format_double(model.alpha) + '\n';
    s += "mse," + format_double(model.mse) + '\n';
    s += "r2," + format_double(model.r2) + '\n';
    write_text(path, s);
}

DirectModel read_model(const fs::path& path) {
    const CsvTable t = read_csv(path);
    expect_header(t, kModelHeader, path);
    DirectModel model;
    bool seen_y0 = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& key = t.rows[r][0];
        const double v = parse_double(t.rows[r][1], where(path, r, "value"));
        if (key == "y0") {
            model.y0 = v;
            seen_y0 = true;
        } else if (key == "alpha") {
            model.alpha = v;
        } else if (key == "mse") {
            model.mse = v;
        } else if (key == "r2") {
            model.r2 = v;
        } else if (key.size() > 1 && key[0] == 'w' &&
                   parse_index(key.substr(1), where(path, r, "parameter")) == model.k() + 1) {
            model.w.push_back(v);
        } else {
            throw IoError(where(path, r, "parameter") + ": unexpected parameter '" + key + "'");
        }
    }
    if (!seen_y0 || model.w.empty()) throw IoError(path.string() + ": model needs y0 and w1..wk");
    return model;
}

void write_cv_curve(const fs::path& path, const CvCurve& curve) {
    std::string s(kCvCurveHeader);
    s += '\n';
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        s += format_double(curve.alphas[i]) + ',' + format_double(curve.mean_mse[i]) + ',' +
             format_double(curve.se_mse[i]) + '\n';
    }
    write_text(path, s);
}

std::string fit_report_header(std::size_t k) {
    std::string s = "dataset,rows,outliers_removed,alpha,mse,r2,y0";
    for (std::size_t c = 1; c <= k; ++c) s += ",w" + std::to_string(c);
    return s;
}

void write_fit_report(const fs::path& path, const std::vector<FitReportRow>& rows) {
    if (rows.empty()) throw InvalidArgument("fit report needs at least one row");
    const std::size_t k = rows.front().model.k();
    std::string s = fit_report_header(k) + '\n';
    for (const auto& r : rows) {
        if (r.model.k() != k) throw InvalidArgument("fit report rows disagree on k");
        s += std::string(1, r.dataset) + ',' + std::to_string(r.rows) + ',' +
             std::to_string(r.outliers_removed) + ',' + format_double(r.model.alpha) + ',' +
             format_double(r.model.mse) + ',' + format_double(r.model.r2) + ',' +
             format_double(r.model.y0);
        for (double w : r.model.w) s += ',' + format_double(w);
        s += '\n';
    }
    write_text(path, s);
}

std::vector<FitReportRow> read_fit_report(const fs::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header.size() < 8) throw IoError(path.string() + ": fit report has too few columns");
    const std::size_t k = t.header.size() - 7;
    expect_header(t, fit_report_header(k), path);
    std::vector<FitReportRow> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        FitReportRow rec;
        if (row[0].size() != 1) throw IoError(where(path, r, "dataset") + ": expected a, b or c");
        rec.dataset = row[0][0];
        rec.rows = parse_index(row[1], where(path, r, "rows"));
        rec.outliers_removed = parse_index(row[2], where(path, r, "outliers_removed"));
        rec.model.alpha = parse_double(row[3], where(path, r, "alpha"));
        rec.model.mse = parse_double(row[4], where(path, r, "mse"));
        rec.model.r2 = parse_double(row[5], where(path, r, "r2"));
        rec.model.y0 = parse_double(row[6], where(path, r, "y0"));
        for (std::size_t c = 0; c < k; ++c) {
            rec.model.w.push_back(parse_double(row[7 + c], where(path, r, "w")));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void write_reconstruction(const fs::path& path, std::span<const double> centres,
                          std::span<const double> estimate, const PipeProfile* truth) {
    if (centres.size() != estimate.size()) {
        throw InvalidArgument("reconstruction: centres and estimates differ in length");
    }
    if (truth && truth->size() != estimate.size()) {
        throw InvalidArgument("reconstruction: truth profile length differs from the estimate");
    }
    std::string s(truth ? kReconstructionTruthHeader : kReconstructionHeader);
    s += '\n';
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        s += std::to_string(i) + ',' + format_double(centres[i]) + ',' + format_double(estimate[i]);
        if (truth) {
            s += ',' + format_double(truth->thickness()[i]) + ',' + (truth->joint_mask()[i] ? "1" : "0");
        }
        s += '\n';
    }
    write_text(path, s);
}

ReconstructionRecord read_reconstruction(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::string header = join(t.header);
    if (header != kReconstructionHeader && header != kReconstructionTruthHeader) {
        throw IoError(path.string() + ": unknown header '" + header + "', expected '" +
                      std::string(kReconstructionHeader) + "' optionally followed by truth columns");
    }
    ReconstructionRecord rec;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (parse_index(t.rows[r][0], where(path, r, "piece_index")) != r) {
            throw IoError(where(path, r, "piece_index") + ": pieces must be numbered 0, 1, 2, ...");
        }
        rec.centre.push_back(parse_double(t.rows[r][1], where(path, r, "centre_position_m")));
        rec.estimate.push_back(parse_double(t.rows[r][2], where(path, r, "thickness_mm_estimated")));
    }
    return rec;
}

void write_eval_report(const fs::path& path, const EvalReport& report) {
    std::string s(kEvalReportHeader);
    s += '\n';
    auto add = [&s](std::string_view key, const std::string& value) {
        s += std::string(key) + ',' + value + '\n';
    };
    if (report.errors) {
        add("mse_all", format_double(report.errors->mse_all));
        add("rmse_all", format_double(report.errors->rmse_all));
        add("mse_excluding_joints", format_double(report.errors->mse_excluding_joints));
        add("rmse_excluding_joints", format_double(report.errors->rmse_excluding_joints));
        add("guard_pieces", std::to_string(report.guard_pieces));
        add("pieces_excluded", std::to_string(report.errors->pieces_excluded));
    }
    if (report.solution) {
        add("m", std::to_string(report.m));
        add("n", std::to_string(report.n));
        add("dof", std::to_string(report.solution->dof));
        add("condition", format_double(report.solution->condition));
        add("residual_norm", format_double(report.solution->residual_norm));
    }
    for (const auto& w : report.warnings) {
        std::string clean = w;
        for (char& ch : clean) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        add("warning", clean);
    }
    write_text(path, s);
}

std::vector<std::pair<std::string, std::string>> read_eval_report(const fs::path& path) {
    const CsvTable t = read_csv(path);
    expect_header(t, kEvalReportHeader, path);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& row : t.rows) out.emplace_back(row[0], row[1]);
    return out;
}

}  // namespace rfec::io
