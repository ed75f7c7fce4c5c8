#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "bdfl/manybody.hpp"

namespace bdfl {

/// Finite-state classical model: one-body potential V (m) and pair interaction w (m x m, symmetric).
struct ClassicalModel {
  int m = 1;
  RVector V;
  RMatrix w;

  void validate() const;
};

// Quantum model schema:
//   {"d": 2,
//    "h": {"re": [[..]], "im": [[..]]},
//    "w": {"re": [[..]], "im": [[..]]}            (d^2 x d^2, row (a*d+b), column (c*d+e))
//      or {"preset": "rank_one_pair", "g": 2.0}
//      or {"preset": "density_density", "g": [[..]]}}
// "im" blocks are optional.
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& model);

// Classical model schema: {"m": 2, "V": [..], "w": [[..]]}
ClassicalModel classical_model_from_json(const nlohmann::json& j);
nlohmann::json classical_model_to_json(const ClassicalModel& model);

nlohmann::json read_json_file(const std::string& path);

CMatrix complex_matrix_from_json(const nlohmann::json& j, Index rows, Index cols, const char* what);
nlohmann::json complex_matrix_to_json(const CMatrix& m);

}  // namespace bdfl
