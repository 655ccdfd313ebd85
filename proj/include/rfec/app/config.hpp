#pragma once

// Run configuration for the command-line workflow, read from one JSON file.

#include <cstddef>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rfec/core.hpp"
#include "rfec/design.hpp"
#include "rfec/forward.hpp"
#include "rfec/inverse.hpp"
#include "rfec/lasso.hpp"

namespace rfec::app {

enum class OutlierFilter { None, Chauvenet };

struct RunConfig {
    MaterialProperties material;
    ToolGeometry tool;
    SynthesisSpec synthesis;
    LassoOptions lasso;
    DatasetMode mode = DatasetMode::NoJoints;
    std::size_t guard_pieces = 1;
    OutlierFilter outlier_filter = OutlierFilter::None;
    InverseOptions inverse;
};

/// Cast iron at 20 Hz, the 27-cell tool with exciter cells 1-5 and receiver
/// cells 19-27, and a 60 m pipe of 600 pieces.
RunConfig default_config();

/// Sparse attenuation weights spread evenly over the exciter and receiver
/// cells, each group summing to -kappa (per mm of wall).
DirectModel default_true_model(const MaterialProperties& mat, const ToolGeometry& tool);

/// Starts from default_config() and overrides the keys present in `j`.
/// Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace rfec::app
