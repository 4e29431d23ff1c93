#pragma once

#include <string>

#include <json.hpp>

#include "lcs/lcs.h"

namespace c3 {

// JSON schema (see docs/schemas.md): object with keys A, B, D, d, E, F, H, c.
// Matrices are arrays of row arrays (row-major); vectors are flat arrays.
nlohmann::json LcsModelToJson(const LcsModel& model);
LcsModel LcsModelFromJson(const nlohmann::json& j);

LcsModel LoadLcsModel(const std::string& path);
void SaveLcsModel(const LcsModel& model, const std::string& path);

nlohmann::json MatrixToJson(const Eigen::MatrixXd& m);
nlohmann::json VectorToJson(const Eigen::VectorXd& v);
Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j);
Eigen::VectorXd VectorFromJson(const nlohmann::json& j);

}  // namespace c3
