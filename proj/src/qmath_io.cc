#include "gpress/qmath_io.h"

#include <cmath>
#include <stdexcept>

namespace gpress {

nlohmann::json matrix_to_json(const Matrix &m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    return out;
}

Matrix matrix_from_json(const nlohmann::json &j) {
    if (!j.is_array() || j.empty()) {
        throw std::invalid_argument("matrix JSON must be a nonempty array of [re, im] pairs");
    }
    auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(j.size()))));
    if (d * d != static_cast<Eigen::Index>(j.size())) {
        throw std::invalid_argument("matrix JSON length is not a perfect square");
    }
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const auto &entry = j.at(static_cast<std::size_t>(i * d + k));
            if (!entry.is_array() || entry.size() != 2) {
                throw std::invalid_argument("matrix JSON entries must be [re, im] pairs");
            }
            m(i, k) = Complex(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    return m;
}

nlohmann::json state_to_json(const DensityMatrix &rho) {
    return {{"d", rho.dim()}, {"bloch", bloch_decompose(rho, gell_mann_basis(rho.dim()))}};
}

DensityMatrix state_from_json(const nlohmann::json &j) {
    if (!j.is_object() || !j.contains("d") || !j.contains("bloch")) {
        throw std::invalid_argument("state JSON must have fields \"d\" and \"bloch\"");
    }
    int d = j.at("d").get<int>();
    auto c = j.at("bloch").get<std::vector<double>>();
    TracelessBasis basis = gell_mann_basis(d);
    return DensityMatrix(bloch_reconstruct(c, basis));
}

}  // namespace gpress
