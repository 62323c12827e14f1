#pragma once

#include <variant>
#include <vector>

#include "json.hpp"
#include "roughbattery/exec.hpp"
#include "roughbattery/gbt.hpp"
#include "roughbattery/linear.hpp"
#include "roughbattery/matrix.hpp"
#include "roughbattery/mlp.hpp"

namespace roughbattery::models {

using RegressorModel = std::variant<MlpNetwork, LinearModel, GbtEnsemble>;

std::size_t input_width(const RegressorModel& model);

/// Row-wise predictions; rows are independent so the parallel path is bitwise
/// identical to the serial one. Throws DataError on a width mismatch.
std::vector<double> predict(const RegressorModel& model, const Matrix& x, Exec exec = Exec::parallel);

inline constexpr int kModelSchemaVersion = 1;

/// Versioned JSON: {"schema_version", "kind", ...kind-specific fields}.
nlohmann::json model_to_json(const RegressorModel& model);
/// Throws SchemaError for an unknown kind or schema version.
RegressorModel model_from_json(const nlohmann::json& j);

}  // namespace roughbattery::models
