#pragma once

#include "json.hpp"
#include "reuse_lab/model.hpp"

namespace reuse_lab {

/// {"eigenvalues": [...], "ground_truth": [...], "noise_std": s, "init": [...], "data_bound": D}
nlohmann::json to_json(const Problem& problem);
Problem problem_from_json(const nlohmann::json& doc);

/// Tagged record: {"law": "power", "a": 4.5, "b": 1.0, "d": 100000}, or
/// {"law": "explicit", "probabilities": [...], "scales": [...]}.
nlohmann::json to_json(const ZipfModel& model);
ZipfModel zipf_model_from_json(const nlohmann::json& doc);

}  // namespace reuse_lab
