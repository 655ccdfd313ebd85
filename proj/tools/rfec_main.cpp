// rfec: synthesize RFEC inspection data, fit the direct sensor model, invert
// it to a thickness profile and score the reconstruction.
//
// Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rfec/app/commands.hpp"
#include "rfec/app/config.hpp"
#include "rfec/errors.hpp"

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitIo = 2;

struct Options {
    std::string config;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    bool force_dof = false;
    std::string profile;
    std::string measurements;
    std::string model;
    std::string reconstruction;
};

rfec::app::RunConfig resolve_config(const Options& o) {
    rfec::app::RunConfig cfg =
        o.config.empty() ? rfec::app::default_config() : rfec::app::load_config(o.config);
    if (!o.mode.empty()) cfg.mode = rfec::parse_dataset_mode(o.mode);
    if (o.seed) cfg.synthesis.seed = *o.seed;
    return cfg;
}

std::string or_default(const std::string& given, const std::string& out, const char* file) {
    return given.empty() ? (std::filesystem::path(out) / file).string() : given;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Remote-field eddy-current direct and inverse sensor model"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "JSON run configuration");
        cmd->add_option("--mode", o.mode, "dataset mode")->check(CLI::IsMember({"a", "b", "c"}));
        cmd->add_option("--seed", o.seed, "override synthesis.seed");
        cmd->add_option("--out", o.out, "output directory");
    };

    auto* synth = app.add_subcommand("synth", "write profile.csv and measurements.csv");
    add_common(synth);

    auto* fit = app.add_subcommand("fit-direct", "fit the direct model with cross-validated LASSO");
    add_common(fit);
    fit->add_option("--measurements", o.measurements, "measurements CSV (default <out>/measurements.csv)");
    fit->add_option("--profile", o.profile, "profile CSV (default <out>/profile.csv)");

    auto* invert = app.add_subcommand("invert", "reconstruct the thickness profile");
    add_common(invert);
    invert->add_option("--model", o.model, "model CSV (default <out>/model.csv)");
    invert->add_option("--measurements", o.measurements, "measurements CSV (default <out>/measurements.csv)");
    invert->add_option("--profile", o.profile, "ground-truth profile CSV, optional");
    invert->add_flag("--force-dof", o.force_dof, "solve even when the degrees-of-freedom rule fails");

    auto* eval = app.add_subcommand("eval", "score a reconstruction against a profile");
    add_common(eval);
    eval->add_option("--reconstruction", o.reconstruction,
                     "reconstruction CSV (default <out>/reconstruction.csv)");
    eval->add_option("--profile", o.profile, "ground-truth profile CSV (default <out>/profile.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitIo;
    }

    using namespace rfec::app;
    try {
        const RunConfig cfg = resolve_config(o);
        if (synth->parsed()) {
            cmd_synth(cfg, o.out);
        } else if (fit->parsed()) {
            const auto result = cmd_fit_direct(cfg, or_default(o.measurements, o.out, kMeasurementsFile),
                                               or_default(o.profile, o.out, kProfileFile), o.out);
            for (const auto& row : result.report) {
                std::cout << "dataset " << row.dataset << ": rows " << row.rows << ", MSE "
                          << rfec::io::format_double(row.model.mse) << ", R2 "
                          << rfec::io::format_double(row.model.r2) << "\n";
            }
        } else if (invert->parsed()) {
            std::optional<std::filesystem::path> truth;
            if (!o.profile.empty()) truth = o.profile;
            const auto result = cmd_invert(cfg, or_default(o.model, o.out, kModelFile),
                                           or_default(o.measurements, o.out, kMeasurementsFile), truth,
                                           o.out, o.force_dof);
            for (const auto& w : result.solution.warnings) std::cerr << "warning: " << w << "\n";
            if (result.errors) {
                std::cout << "rmse_all " << rfec::io::format_double(result.errors->rmse_all)
                          << " mm, rmse_excluding_joints "
                          << rfec::io::format_double(result.errors->rmse_excluding_joints) << " mm\n";
            }
        } else if (eval->parsed()) {
            const auto errors = cmd_eval(cfg, or_default(o.reconstruction, o.out, kReconstructionFile),
                                         or_default(o.profile, o.out, kProfileFile), o.out);
            std::cout << "rmse_all " << rfec::io::format_double(errors.rmse_all)
                      << " mm, rmse_excluding_joints "
                      << rfec::io::format_double(errors.rmse_excluding_joints) << " mm\n";
        }
    } catch (const rfec::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const rfec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
