#pragma once

#include "conespec/mixture.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace conespec {

/// Model config:
///   {"domain": {"kind": "interval", "lo": a, "hi": b}
///            | {"kind": "polygon", "rectangles": [[x0, y0, x1, y1], ...]}
///            | {"kind": "circles", "circles": [{"center": [x, y], "radius": r}, ...]}
///            | {"kind": "dumbbell", "vartheta": t},
///    "components": [{"kind": "gaussian", "mean": x | [x, y], "sd": s}
///                 | {"kind": "uniform", "interval": [a, b]} | {"box": [x0, y0, x1, y1]}
///                                     | {"arc": {"circle": i, "from": a, "to": b}}
///                 | {"kind": "dumbbell_left" | "dumbbell_right", "vartheta": t, "width": e,
///                    "partition": "good" | "bad", "profile": "normalized" | "raw"}
///                 | {"kind": "table", "csv": path} | {"points": [[x, density], ...]}],
///    "weights": [...],
///    "c_M": optional positive constant}
/// Relative table paths resolve against base_dir. Errors name the field.
MixtureModel parse_model(const nlohmann::json& config, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; JSON syntax errors report line and column.
nlohmann::json read_config(const std::filesystem::path& path);

struct PresetOptions {
  double gamma = 6.0;       // gaussian-pair offset
  double vartheta = 0.01;   // dumbbell bar scale
  double width = 0.1;       // dumbbell crossover width epsilon
  std::string partition = "good";
};

const std::vector<std::string>& preset_names();
/// Config for gaussian-pair, dumbbell, two-circles or uniform-circle.
nlohmann::json preset_config(const std::string& name, const PresetOptions& options = {});

}  // namespace conespec
