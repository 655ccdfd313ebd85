#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rfec/app/commands.hpp"
#include "rfec/app/config.hpp"
#include "rfec/app/csv_io.hpp"
#include "rfec/errors.hpp"

using namespace rfec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rfec_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

/// Small, fast scenario: 10 m of pipe, a 7-cell tool.
app::RunConfig small_config(bool joints, double noise) {
    app::RunConfig cfg = app::default_config();
    cfg.tool = ToolGeometry(7, 0.1, {1, 2}, {5, 7}, 0.01);
    cfg.synthesis.n_pieces = 100;
    cfg.synthesis.noise_sigma = noise;
    cfg.synthesis.joint_positions = joints ? periodic_joint_positions(100, 40, 2, 20) : std::vector<std::size_t>{};
    cfg.synthesis.joint_damping = joints ? 0.5 : 1.0;
    cfg.synthesis.true_model.y0 = 0.1;
    cfg.synthesis.true_model.w = {-0.03, -0.02, 0.0, 0.0, -0.01, -0.01, -0.005};
    cfg.lasso.alpha_count = 30;
    return cfg;
}

}  // namespace

TEST_CASE("doubles are written with 17 significant digits and read back exactly") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(0.016) == "0.016");
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
        CHECK(io::parse_double(io::format_double(v), "test") == v);
    }
    CHECK(std::isnan(io::parse_double("nan", "test")));
    CHECK_THROWS_AS(io::parse_double("1.0x", "test"), IoError);
}

TEST_CASE("profile file round trip and schema") {
    const auto dir = scratch("profile");
    const PipeProfile p(0.1, {30.0, 29.5, 90.0}, {false, false, true});
    io::write_profile(dir / "p.csv", p);
    CHECK(first_line(dir / "p.csv") == "piece_index,centre_position_m,thickness_mm,is_joint");
    const auto q = io::read_profile(dir / "p.csv");
    CHECK(q.size() == 3);
    CHECK(q.step_length() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(q.thickness()[1] == 29.5);
    CHECK(q.joint_mask() == p.joint_mask());

    std::ofstream(dir / "bad.csv") << "index,centre,thickness,joint\n0,0.05,1,0\n";
    CHECK_THROWS_WITH_AS(io::read_profile(dir / "bad.csv"), doctest::Contains("header"), IoError);
    CHECK_THROWS_AS(io::read_profile(dir / "missing.csv"), IoError);
}

TEST_CASE("measurement file round trip with and without phase") {
    const auto dir = scratch("meas");
    const MeasurementSeries with(std::vector<double>{0.0, 0.01, 0.02}, {1.0, -2.5, 3.25},
                                 std::vector<double>{0.1, 0.2, 0.3});
    io::write_measurements(dir / "a.csv", with);
    CHECK(first_line(dir / "a.csv") == "position_m,log_amplitude,phase_rad");
    const auto a = io::read_measurements(dir / "a.csv");
    REQUIRE(a.phase());
    CHECK((*a.phase())[2] == 0.3);
    CHECK(a.log_amplitude()[1] == -2.5);

    const MeasurementSeries without(std::vector<double>{0.0, 0.01}, {1.0, 2.0});
    io::write_measurements(dir / "b.csv", without);
    const auto b = io::read_measurements(dir / "b.csv");
    CHECK_FALSE(b.phase());
    CHECK(b.position()[1] == 0.01);
}

TEST_CASE("model file round trip") {
    const auto dir = scratch("model");
    DirectModel m;
    m.y0 = -2.1;
    m.w = {-0.0132, 0.0, -0.0071};
    m.alpha = 4.8;
    m.mse = 0.016;
    m.r2 = 0.8779;
    io::write_model(dir / "m.csv", m);
    CHECK(first_line(dir / "m.csv") == "parameter,value");
    const auto r = io::read_model(dir / "m.csv");
    CHECK(r.y0 == m.y0);
    CHECK(r.w == m.w);
    CHECK(r.alpha == m.alpha);
    CHECK(r.mse == 0.016);
    CHECK(r.r2 == 0.8779);
}

TEST_CASE("fit report layout") {
    const auto dir = scratch("report");
    CHECK(io::fit_report_header(2) == "dataset,rows,outliers_removed,alpha,mse,r2,y0,w1,w2");
    io::FitReportRow row{'b', 120, 3, DirectModel{0.5, {-0.1, -0.2}, 0.01, 0.02, 0.6391}};
    io::write_fit_report(dir / "r.csv", {row});
    const auto back = io::read_fit_report(dir / "r.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].dataset == 'b');
    CHECK(back[0].rows == 120);
    CHECK(back[0].outliers_removed == 3);
    CHECK(back[0].model.r2 == 0.6391);
    CHECK(back[0].model.w == row.model.w);
}

TEST_CASE("reconstruction file omits truth columns without a profile") {
    const auto dir = scratch("recon");
    const std::vector<double> centres{0.05, 0.15};
    const std::vector<double> est{29.0, 31.0};
    io::write_reconstruction(dir / "plain.csv", centres, est, nullptr);
    CHECK(first_line(dir / "plain.csv") == "piece_index,centre_position_m,thickness_mm_estimated");
    const PipeProfile truth(0.1, {30.0, 30.0}, {false, true});
    io::write_reconstruction(dir / "truth.csv", centres, est, &truth);
    CHECK(first_line(dir / "truth.csv") ==
          "piece_index,centre_position_m,thickness_mm_estimated,thickness_mm_truth,is_joint");
    CHECK(io::read_reconstruction(dir / "truth.csv").estimate == est);
    CHECK(io::read_reconstruction(dir / "plain.csv").estimate == est);
}

TEST_CASE("default configuration") {
    const auto cfg = app::default_config();
    CHECK(cfg.tool.k() == 27);
    CHECK(cfg.tool.exciter_cells() == CellRange{1, 5});
    CHECK(cfg.tool.receiver_cells() == CellRange{19, 27});
    CHECK(cfg.synthesis.n_pieces == 600);
    CHECK(cfg.synthesis.step_length * static_cast<double>(cfg.synthesis.n_pieces) == doctest::Approx(60.0));
    CHECK(cfg.material.mu_r() == 4.96);
    CHECK(cfg.mode == DatasetMode::NoJoints);
    double exciter = 0.0;
    for (int c = 1; c <= 5; ++c) exciter += cfg.synthesis.true_model.w[static_cast<std::size_t>(c - 1)];
    CHECK(exciter == doctest::Approx(-attenuation_constant(cfg.material) / 1000.0));
    CHECK(cfg.synthesis.true_model.w[10] == 0.0);
}

TEST_CASE("configuration from JSON") {
    const auto j = nlohmann::json::parse(R"({
        "material": {"preset": "copper", "frequency_hz": 50},
        "tool": {"k": 9, "cell_pitch_m": 0.05, "exciter_cells": [1, 2], "receiver_cells": [7, 9]},
        "synthesis": {"n_pieces": 200, "joint_spacing_m": 4.0, "joint_width_pieces": 2,
                      "seed": 12, "true_model": {"y0": 0.5, "w": [-1, 0, 0, 0, 0, 0, 0, 0, -2]}},
        "lasso": {"folds": 5, "fold_strategy": "contiguous"},
        "mode": "b",
        "guard_pieces": 2,
        "outlier_filter": "chauvenet"
    })");
    const auto cfg = app::config_from_json(j);
    CHECK(cfg.material.sigma() == 5.99e7);
    CHECK(cfg.material.omega() == doctest::Approx(2.0 * kPi * 50.0));
    CHECK(cfg.tool.k() == 9);
    CHECK(cfg.synthesis.seed == 12);
    CHECK(cfg.synthesis.joint_positions == std::vector<std::size_t>{20, 21, 60, 61, 100, 101, 140, 141, 180, 181});
    CHECK(cfg.synthesis.true_model.w.size() == 9);
    CHECK(cfg.lasso.folds == 5);
    CHECK(cfg.lasso.fold_strategy == FoldStrategy::ContiguousBlocks);
    CHECK(cfg.mode == DatasetMode::NoReceiverJoints);
    CHECK(cfg.guard_pieces == 2);
    CHECK(cfg.outlier_filter == app::OutlierFilter::Chauvenet);

    const auto again = app::config_from_json(app::config_to_json(cfg));
    CHECK(app::config_to_json(again) == app::config_to_json(cfg));

    CHECK_THROWS_WITH_AS(app::config_from_json(nlohmann::json::parse(R"({"tool": {"kk": 3}})")),
                         doctest::Contains("unknown key"), IoError);
    CHECK_THROWS_AS(app::config_from_json(nlohmann::json::parse(R"({"mode": "z"})")), Error);
}

TEST_CASE("synth is byte-for-byte deterministic") {
    const auto cfg = small_config(true, 0.01);
    const auto a = scratch("synth_a");
    const auto b = scratch("synth_b");
    app::cmd_synth(cfg, a);
    app::cmd_synth(cfg, b);
    CHECK(slurp(a / app::kProfileFile) == slurp(b / app::kProfileFile));
    CHECK(slurp(a / app::kMeasurementsFile) == slurp(b / app::kMeasurementsFile));
    CHECK(first_line(a / app::kProfileFile) == "piece_index,centre_position_m,thickness_mm,is_joint");
    CHECK(first_line(a / app::kMeasurementsFile) == "position_m,log_amplitude,phase_rad");
}

TEST_CASE("fit-direct on noiseless linear data") {
    auto cfg = small_config(false, 0.0);
    cfg.mode = DatasetMode::All;
    // Shrinkage at alpha_max * 1e-4 alone costs about 1e-8 of R^2.
    cfg.lasso.alpha_min_ratio = 1e-6;
    const auto dir = scratch("fit_clean");
    app::cmd_synth(cfg, dir);
    const auto res = app::cmd_fit_direct(cfg, dir / app::kMeasurementsFile, dir / app::kProfileFile, dir);
    REQUIRE(res.report.size() == 3);
    CHECK(res.report[0].model.r2 >= 1.0 - 1e-9);
    CHECK(fs::exists(dir / app::kModelFile));
    CHECK(first_line(dir / app::kCvCurveFile) == "alpha,mean_mse,se_mse");
    CHECK(io::read_fit_report(dir / app::kFitReportFile).size() == 3);
}

TEST_CASE("fit-direct row counts shrink with masking") {
    const auto cfg = small_config(true, 0.01);
    const auto dir = scratch("fit_joints");
    app::cmd_synth(cfg, dir);
    const auto res = app::cmd_fit_direct(cfg, dir / app::kMeasurementsFile, dir / app::kProfileFile, dir);
    CHECK(res.report[2].rows <= res.report[1].rows);
    CHECK(res.report[1].rows <= res.report[0].rows);
    CHECK(res.report[2].rows < res.report[0].rows);
}

TEST_CASE("invert recovers a noiseless joint-free profile") {
    auto cfg = small_config(false, 0.0);
    const auto dir = scratch("invert_clean");
    app::cmd_synth(cfg, dir);
    io::write_model(dir / app::kModelFile, cfg.synthesis.true_model);
    const auto res = app::cmd_invert(cfg, dir / app::kModelFile, dir / app::kMeasurementsFile,
                                     dir / app::kProfileFile, dir, false);
    REQUIRE(res.errors);
    CHECK(res.errors->rmse_all < 1e-6);
    const auto report = io::read_eval_report(dir / app::kEvalReportFile);
    REQUIRE(!report.empty());
    CHECK(report.front().first == "mse_all");

    const auto eval = app::cmd_eval(cfg, dir / app::kReconstructionFile, dir / app::kProfileFile, dir);
    CHECK(eval.rmse_all == doctest::Approx(res.errors->rmse_all));
}

TEST_CASE("invert without ground truth writes estimates only") {
    auto cfg = small_config(false, 0.0);
    const auto dir = scratch("invert_plain");
    app::cmd_synth(cfg, dir);
    io::write_model(dir / app::kModelFile, cfg.synthesis.true_model);
    const auto res = app::cmd_invert(cfg, dir / app::kModelFile, dir / app::kMeasurementsFile,
                                     std::nullopt, dir, false);
    CHECK_FALSE(res.errors);
    CHECK(first_line(dir / app::kReconstructionFile) == "piece_index,centre_position_m,thickness_mm_estimated");
}

TEST_CASE("invert enforces the degrees-of-freedom rule unless forced") {
    auto cfg = small_config(false, 0.0);
    cfg.tool = ToolGeometry(7, 0.1, {1, 2}, {5, 7}, 0.05);
    const auto dir = scratch("invert_dof");
    app::cmd_synth(cfg, dir);
    io::write_model(dir / app::kModelFile, cfg.synthesis.true_model);
    CHECK_THROWS_WITH_AS(app::cmd_invert(cfg, dir / app::kModelFile, dir / app::kMeasurementsFile,
                                         dir / app::kProfileFile, dir, false),
                         doctest::Contains("m below 10n"), NumericalError);
    const auto res = app::cmd_invert(cfg, dir / app::kModelFile, dir / app::kMeasurementsFile,
                                     dir / app::kProfileFile, dir, true);
    CHECK_FALSE(res.solution.warnings.empty());
}

TEST_CASE("invert rejects a model for a different tool") {
    auto cfg = small_config(false, 0.0);
    const auto dir = scratch("invert_k");
    app::cmd_synth(cfg, dir);
    io::write_model(dir / app::kModelFile, DirectModel{0.0, {-0.1, -0.1}});
    CHECK_THROWS_AS(app::cmd_invert(cfg, dir / app::kModelFile, dir / app::kMeasurementsFile,
                                    std::nullopt, dir, false),
                    InvalidArgument);
}
