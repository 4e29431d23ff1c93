#include "lcs/lcs_io.h"

#include <fstream>
#include <stdexcept>

namespace c3 {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

json MatrixToJson(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json VectorToJson(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

MatrixXd MatrixFromJson(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix: expected array");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) {
    throw std::invalid_argument("matrix: expected array of row arrays");
  }
  const int cols = static_cast<int>(j[0].size());
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("matrix: ragged rows");
    }
    for (int jj = 0; jj < cols; ++jj) m(i, jj) = j[i][jj].get<double>();
  }
  return m;
}

VectorXd VectorFromJson(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector: expected array");
  VectorXd v(j.size());
  for (int i = 0; i < static_cast<int>(j.size()); ++i) {
    v[i] = j[i].get<double>();
  }
  return v;
}

json LcsModelToJson(const LcsModel& model) {
  return json{{"A", MatrixToJson(model.A)}, {"B", MatrixToJson(model.B)},
              {"D", MatrixToJson(model.D)}, {"d", VectorToJson(model.d)},
              {"E", MatrixToJson(model.E)}, {"F", MatrixToJson(model.F)},
              {"H", MatrixToJson(model.H)}, {"c", VectorToJson(model.c)}};
}

LcsModel LcsModelFromJson(const json& j) {
  for (const char* key : {"A", "B", "D", "d", "E", "F", "H", "c"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("LcsModel: missing key ") + key);
    }
  }
  LcsModel model;
  model.A = MatrixFromJson(j["A"]);
  model.B = MatrixFromJson(j["B"]);
  model.D = MatrixFromJson(j["D"]);
  model.d = VectorFromJson(j["d"]);
  model.E = MatrixFromJson(j["E"]);
  model.F = MatrixFromJson(j["F"]);
  model.H = MatrixFromJson(j["H"]);
  model.c = VectorFromJson(j["c"]);
  model.Validate();
  return model;
}

LcsModel LoadLcsModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return LcsModelFromJson(j);
}

void SaveLcsModel(const LcsModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << LcsModelToJson(model).dump(2) << "\n";
}

}  // namespace c3
