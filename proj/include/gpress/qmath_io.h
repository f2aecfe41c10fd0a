#pragma once

#include <json.hpp>

#include "gpress/qmath.h"

namespace gpress {

// Matrices serialize as a flat row-major JSON array of [re, im] pairs:
//   [[m00_re, m00_im], [m01_re, m01_im], ..., [m(d-1)(d-1)_re, m(d-1)(d-1)_im]]
nlohmann::json matrix_to_json(const Matrix &m);
Matrix matrix_from_json(const nlohmann::json &j);

// States given by Gell-Mann coefficients: {"d": 2, "bloch": [c_1, ..., c_{d^2-1}]}.
nlohmann::json state_to_json(const DensityMatrix &rho);
DensityMatrix state_from_json(const nlohmann::json &j);

}  // namespace gpress
