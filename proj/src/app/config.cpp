#include "rfec/app/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "rfec/errors.hpp"

namespace rfec::app {

using nlohmann::json;

namespace {

constexpr double kDefaultFrequencyHz = 20.0;

void allow_only(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw IoError("config: '" + std::string(where) + "' must be an object");
    for (const auto& item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            throw IoError("config: unknown key '" + std::string(where) + "." + item.key() + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

CellRange read_range(const json& obj, const char* key, CellRange fallback) {
    if (!obj.contains(key)) return fallback;
    const auto v = get_or<std::vector<int>>(obj, key, {});
    if (v.size() != 2) throw IoError(std::string("config: '") + key + "' must be [first, last]");
    return {v[0], v[1]};
}

FoldStrategy parse_fold_strategy(const std::string& s) {
    if (s == "shuffled") return FoldStrategy::Shuffled;
    if (s == "contiguous") return FoldStrategy::ContiguousBlocks;
    throw IoError("config: fold_strategy must be 'shuffled' or 'contiguous'");
}

}  // namespace

DirectModel default_true_model(const MaterialProperties& mat, const ToolGeometry& tool) {
    const double kappa_per_mm = attenuation_constant(mat) / 1000.0;
    DirectModel model;
    model.w.assign(static_cast<std::size_t>(tool.k()), 0.0);
    for (int c = tool.exciter_cells().first; c <= tool.exciter_cells().last; ++c) {
        model.w[static_cast<std::size_t>(c - 1)] = -kappa_per_mm / tool.exciter_cells().size();
    }
    for (int c = tool.receiver_cells().first; c <= tool.receiver_cells().last; ++c) {
        model.w[static_cast<std::size_t>(c - 1)] = -kappa_per_mm / tool.receiver_cells().size();
    }
    return model;
}

RunConfig default_config() {
    const auto material = materials::cast_iron(2.0 * kPi * kDefaultFrequencyHz);
    const ToolGeometry tool(27, 0.1, {1, 5}, {19, 27}, 0.008);
    SynthesisSpec synth;
    synth.n_pieces = 600;
    synth.step_length = 0.1;
    synth.base_thickness = 30.0;
    synth.corrosion_amplitude = 3.0;
    synth.corrosion_correlation_length = 0.5;
    synth.joint_positions = periodic_joint_positions(synth.n_pieces, 40, 2, 20);
    synth.joint_extra_thickness = 60.0;
    synth.joint_damping = 0.5;
    synth.noise_sigma = 0.01;
    synth.seed = 1;
    synth.true_model = default_true_model(material, tool);
    return RunConfig{material, tool, synth, LassoOptions{}, DatasetMode::NoJoints, 1,
                     OutlierFilter::None, InverseOptions{}};
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg = default_config();
    allow_only(j, "", {"material", "tool", "synthesis", "lasso", "mode", "guard_pieces",
                       "outlier_filter", "max_condition"});
    try {
        if (j.contains("material")) {
            const json& m = j.at("material");
            allow_only(m, "material", {"preset", "mu_r", "sigma_s_per_m", "frequency_hz"});
            double mu_r = cfg.material.mu_r();
            double sigma = cfg.material.sigma();
            if (m.contains("preset")) {
                const auto preset = get_or<std::string>(m, "preset", "");
                const double omega = 2.0 * kPi * kDefaultFrequencyHz;
                MaterialProperties p = preset == "cast_iron" ? materials::cast_iron(omega)
                                       : preset == "copper"  ? materials::copper(omega)
                                       : preset == "air"     ? materials::air(omega)
                                                             : throw IoError("config: unknown material preset '" + preset + "'");
                mu_r = p.mu_r();
                sigma = p.sigma();
            }
            mu_r = get_or(m, "mu_r", mu_r);
            sigma = get_or(m, "sigma_s_per_m", sigma);
            const double freq = get_or(m, "frequency_hz", cfg.material.omega() / (2.0 * kPi));
            cfg.material = MaterialProperties::from_frequency(freq, mu_r, sigma);
        }

        if (j.contains("tool")) {
            const json& t = j.at("tool");
            allow_only(t, "tool", {"k", "cell_pitch_m", "exciter_cells", "receiver_cells", "sample_pitch_m"});
            cfg.tool = ToolGeometry(get_or(t, "k", cfg.tool.k()),
                                    get_or(t, "cell_pitch_m", cfg.tool.cell_pitch()),
                                    read_range(t, "exciter_cells", cfg.tool.exciter_cells()),
                                    read_range(t, "receiver_cells", cfg.tool.receiver_cells()),
                                    get_or(t, "sample_pitch_m", cfg.tool.sample_pitch()));
        }

        SynthesisSpec& s = cfg.synthesis;
        bool explicit_model = false;
        if (j.contains("synthesis")) {
            const json& sj = j.at("synthesis");
            allow_only(sj, "synthesis",
                       {"n_pieces", "step_length_m", "base_thickness_mm", "corrosion_amplitude_mm",
                        "corrosion_correlation_length_m", "joint_positions", "joint_spacing_m",
                        "joint_width_pieces", "joint_offset_pieces", "joint_extra_thickness_mm",
                        "joint_damping", "noise_sigma", "seed", "true_model"});
            s.n_pieces = get_or(sj, "n_pieces", s.n_pieces);
            s.step_length = get_or(sj, "step_length_m", s.step_length);
            s.base_thickness = get_or(sj, "base_thickness_mm", s.base_thickness);
            s.corrosion_amplitude = get_or(sj, "corrosion_amplitude_mm", s.corrosion_amplitude);
            s.corrosion_correlation_length =
                get_or(sj, "corrosion_correlation_length_m", s.corrosion_correlation_length);
            s.joint_extra_thickness = get_or(sj, "joint_extra_thickness_mm", s.joint_extra_thickness);
            s.joint_damping = get_or(sj, "joint_damping", s.joint_damping);
            s.noise_sigma = get_or(sj, "noise_sigma", s.noise_sigma);
            s.seed = get_or(sj, "seed", s.seed);
            if (sj.contains("joint_positions") && sj.contains("joint_spacing_m")) {
                throw IoError("config: give either synthesis.joint_positions or synthesis.joint_spacing_m");
            }
            if (sj.contains("joint_positions")) {
                s.joint_positions = get_or<std::vector<std::size_t>>(sj, "joint_positions", {});
            } else if (sj.contains("joint_spacing_m")) {
                const double spacing = get_or(sj, "joint_spacing_m", 0.0);
                const auto spacing_pieces =
                    static_cast<std::size_t>(std::llround(spacing / s.step_length));
                if (spacing_pieces == 0) throw IoError("config: joint_spacing_m is shorter than a piece");
                s.joint_positions = periodic_joint_positions(
                    s.n_pieces, spacing_pieces, get_or<std::size_t>(sj, "joint_width_pieces", 1),
                    get_or<std::size_t>(sj, "joint_offset_pieces", spacing_pieces / 2));
            }
            if (sj.contains("true_model")) {
                const json& tm = sj.at("true_model");
                allow_only(tm, "synthesis.true_model", {"y0", "w"});
                s.true_model.y0 = get_or(tm, "y0", 0.0);
                s.true_model.w = get_or<std::vector<double>>(tm, "w", {});
                explicit_model = true;
            }
        }
        if (!explicit_model) {
            const double y0 = s.true_model.y0;
            s.true_model = default_true_model(cfg.material, cfg.tool);
            s.true_model.y0 = y0;
        }
        if (s.true_model.k() != static_cast<std::size_t>(cfg.tool.k())) {
            throw IoError("config: synthesis.true_model.w has " + std::to_string(s.true_model.k()) +
                          " entries but tool.k is " + std::to_string(cfg.tool.k()));
        }
        s.validate();

        if (j.contains("lasso")) {
            const json& l = j.at("lasso");
            allow_only(l, "lasso", {"alpha_count", "alpha_min_ratio", "max_iterations", "tolerance",
                                    "folds", "fold_strategy", "fold_seed"});
            LassoOptions& o = cfg.lasso;
            o.alpha_count = get_or(l, "alpha_count", o.alpha_count);
            o.alpha_min_ratio = get_or(l, "alpha_min_ratio", o.alpha_min_ratio);
            o.max_iterations = get_or(l, "max_iterations", o.max_iterations);
            o.tolerance = get_or(l, "tolerance", o.tolerance);
            o.folds = get_or(l, "folds", o.folds);
            if (l.contains("fold_strategy")) {
                o.fold_strategy = parse_fold_strategy(get_or<std::string>(l, "fold_strategy", ""));
            }
            o.fold_seed = get_or(l, "fold_seed", o.fold_seed);
            o.validate();
        }

        if (j.contains("mode")) cfg.mode = parse_dataset_mode(get_or<std::string>(j, "mode", "c"));
        cfg.guard_pieces = get_or(j, "guard_pieces", cfg.guard_pieces);
        if (j.contains("outlier_filter")) {
            const auto f = get_or<std::string>(j, "outlier_filter", "none");
            if (f == "none") {
                cfg.outlier_filter = OutlierFilter::None;
            } else if (f == "chauvenet") {
                cfg.outlier_filter = OutlierFilter::Chauvenet;
            } else {
                throw IoError("config: outlier_filter must be 'none' or 'chauvenet'");
            }
        }
        cfg.inverse.max_condition = get_or(j, "max_condition", cfg.inverse.max_condition);
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
    const auto& s = cfg.synthesis;
    const auto& t = cfg.tool;
    const auto& l = cfg.lasso;
    return json{
        {"material",
         {{"mu_r", cfg.material.mu_r()},
          {"sigma_s_per_m", cfg.material.sigma()},
          {"frequency_hz", cfg.material.omega() / (2.0 * kPi)}}},
        {"tool",
         {{"k", t.k()},
          {"cell_pitch_m", t.cell_pitch()},
          {"exciter_cells", {t.exciter_cells().first, t.exciter_cells().last}},
          {"receiver_cells", {t.receiver_cells().first, t.receiver_cells().last}},
          {"sample_pitch_m", t.sample_pitch()}}},
        {"synthesis",
         {{"n_pieces", s.n_pieces},
          {"step_length_m", s.step_length},
          {"base_thickness_mm", s.base_thickness},
          {"corrosion_amplitude_mm", s.corrosion_amplitude},
          {"corrosion_correlation_length_m", s.corrosion_correlation_length},
          {"joint_positions", s.joint_positions},
          {"joint_extra_thickness_mm", s.joint_extra_thickness},
          {"joint_damping", s.joint_damping},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed},
          {"true_model", {{"y0", s.true_model.y0}, {"w", s.true_model.w}}}}},
        {"lasso",
         {{"alpha_count", l.alpha_count},
          {"alpha_min_ratio", l.alpha_min_ratio},
          {"max_iterations", l.max_iterations},
          {"tolerance", l.tolerance},
          {"folds", l.folds},
          {"fold_strategy", l.fold_strategy == FoldStrategy::Shuffled ? "shuffled" : "contiguous"},
          {"fold_seed", l.fold_seed}}},
        {"mode", std::string(1, to_char(cfg.mode))},
        {"guard_pieces", cfg.guard_pieces},
        {"outlier_filter", cfg.outlier_filter == OutlierFilter::Chauvenet ? "chauvenet" : "none"},
        {"max_condition", cfg.inverse.max_condition},
    };
}

}  // namespace rfec::app
