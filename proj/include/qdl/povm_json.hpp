#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "povmdec.hpp"

namespace qdl {

// {"dim": d, "elements": [{"label": s, "matrix": [[[re, im], ...], ...]}]}
template <class Json>
Povm povm_from_json(const Json& j)
{
    Povm p;
    try {
        p.dim = j.at("dim").template get<int>();
        if (p.dim < 1)
            throw DomainError("POVM dimension must be positive");
        for (const auto& e : j.at("elements")) {
            PovmElement el;
            el.label = e.at("label").template get<std::string>();
            const auto& rows = e.at("matrix");
            if (rows.size() != static_cast<std::size_t>(p.dim))
                throw DomainError("element '" + el.label + "' has the wrong number of rows");
            el.op = ComplexMatrix(p.dim, p.dim);
            for (int r = 0; r < p.dim; ++r) {
                if (rows[r].size() != static_cast<std::size_t>(p.dim))
                    throw DomainError("element '" + el.label + "' has a ragged row");
                for (int c = 0; c < p.dim; ++c) {
                    const auto& z = rows[r][c];
                    if (z.is_number())
                        el.op(r, c) = z.template get<double>();
                    else
                        el.op(r, c) = cplx(z.at(0).template get<double>(), z.at(1).template get<double>());
                }
            }
            p.elements.push_back(std::move(el));
        }
    } catch (const nlohmann::detail::exception& ex) {
        throw DomainError(std::string("malformed POVM JSON: ") + ex.what());
    }
    return p;
}

inline nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m)
{
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json povm_to_json(const Povm& p)
{
    nlohmann::ordered_json j;
    j["dim"] = p.dim;
    j["elements"] = nlohmann::ordered_json::array();
    for (const auto& e : p.elements)
        j["elements"].push_back({{"label", e.label}, {"matrix", matrix_to_json(e.op)}});
    return j;
}

inline nlohmann::ordered_json decomposition_to_json(const DecompositionResult& r)
{
    nlohmann::ordered_json j;
    j["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : r.terms) {
        auto term = povm_to_json(t.extremal);
        term["probability"] = t.probability;
        term["step_probability"] = t.step_probability;
        j["terms"].push_back(std::move(term));
    }
    j["relabel"] = r.relabel;
    return j;
}

inline Povm read_povm_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw DomainError(path + ": " + ex.what());
    }
    return povm_from_json(j);
}

} // namespace qdl
