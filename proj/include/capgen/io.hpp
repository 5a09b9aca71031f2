#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capgen/errors.hpp"
#include "capgen/linalg.hpp"
#include "capgen/orth_design.hpp"

// JSON serialization: matrices as row-major arrays with a dim/rows/cols
// header, and the generator-set override loader.

namespace capgen {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    if (m.rows() == m.cols()) j["dim"] = m.rows();
    std::vector<double> data;
    data.reserve(std::size_t(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = data;
    return j;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw ValidationError("matrix json: missing rows/cols/data");
    Eigen::Index rows = j["rows"].get<Eigen::Index>();
    Eigen::Index cols = j["cols"].get<Eigen::Index>();
    const auto& data = j["data"];
    if (rows < 1 || cols < 1 || Eigen::Index(data.size()) != rows * cols)
        throw ValidationError("matrix json: shape/data mismatch");
    Matrix m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[std::size_t(idx++)].get<double>();
    return m;
}

// Override file: {"dim": d, "generators": [matrix, ...]}. Each matrix may be
// a full header object or a bare row-major array of d*d values. Rejects sets
// that fail orthonormality or inverse-closure.
inline GeneratorSet load_generator_set(const json& j) {
    if (!j.contains("dim") || !j.contains("generators"))
        throw ValidationError("generator set json: missing dim/generators");
    int dim = j["dim"].get<int>();
    std::vector<RotationMatrix> gens;
    for (const auto& item : j["generators"]) {
        Matrix m;
        if (item.is_array()) {
            if (Eigen::Index(item.size()) != Eigen::Index(dim) * dim)
                throw ValidationError("generator set json: bad matrix length");
            m.resize(dim, dim);
            Eigen::Index idx = 0;
            for (Eigen::Index r = 0; r < dim; ++r)
                for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = item[std::size_t(idx++)].get<double>();
        } else {
            m = matrix_from_json(item);
        }
        gens.emplace_back(dim, std::move(m));
    }
    return GeneratorSet(dim, std::move(gens));
}

inline GeneratorSet load_generator_set_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open generator set file: " + path);
    json j;
    in >> j;
    return load_generator_set(j);
}

} // namespace capgen
