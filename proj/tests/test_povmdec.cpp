#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <qdl/povm_json.hpp>

#include "oracles.hpp"

using namespace qdl;

namespace {

double reconstruction_error(const Povm& original, const DecompositionResult& r)
{
    const auto rebuilt = reassemble(r, original.dim);
    double worst = 0.0;
    for (const auto& e : original.elements) {
        const auto it = rebuilt.find(e.label);
        ComplexMatrix diff = e.op;
        if (it != rebuilt.end())
            diff -= it->second;
        worst = std::max(worst, diff.max_abs());
    }
    for (const auto& [label, op] : rebuilt) {
        bool known = false;
        for (const auto& e : original.elements)
            known = known || e.label == label;
        if (!known)
            worst = std::max(worst, op.max_abs());
    }
    return worst;
}

void expect_valid_decomposition(const Povm& p, const DecompositionResult& r, double tol)
{
    EXPECT_LT(reconstruction_error(p, r), tol);
    double total = 0.0;
    for (const auto& t : r.terms) {
        total += t.probability;
        EXPECT_GT(t.probability, 0.0);
        EXPECT_GT(t.step_probability, 0.0);
        EXPECT_LE(t.step_probability, 1.0 + 1e-12);
        EXPECT_TRUE(is_extremal(t.extremal).extremal);
        EXPECT_LE(t.extremal.elements.size(), static_cast<std::size_t>(p.dim * p.dim));
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
}

Povm qubit_pair_points()
{
    // two rank-one elements whose Bloch vectors sit in one hemisphere
    Povm p{2, {}};
    const auto basis = gellmann_basis(2);
    p.elements.push_back({"a", from_bloch({1.0, {0.0, 0.0, 1.0}}, basis, 2)});
    p.elements.push_back({"b", from_bloch({1.0, {0.6, 0.0, 0.8}}, basis, 2)});
    return p;
}

} // namespace

TEST(Generators, Orthogonality)
{
    for (int d = 2; d <= 4; ++d) {
        const auto basis = gellmann_basis(d);
        ASSERT_EQ(basis.size(), static_cast<std::size_t>(d * d - 1));
        for (std::size_t i = 0; i < basis.size(); ++i) {
            EXPECT_NEAR(std::abs(basis[i].trace()), 0.0, 1e-15);
            EXPECT_NEAR((basis[i] - basis[i].adjoint()).max_abs(), 0.0, 1e-15);
            for (std::size_t j = 0; j < basis.size(); ++j)
                EXPECT_NEAR(std::abs((basis[i] * basis[j]).trace()), i == j ? 2.0 : 0.0, 1e-14);
        }
    }
    EXPECT_THROW(gellmann_basis(1), DomainError);
}

TEST(Generators, BlochRoundTrip)
{
    std::mt19937_64 gen(3);
    for (int d = 2; d <= 4; ++d) {
        const auto p = oracle::random_povm(d, 3, gen);
        const auto basis = gellmann_basis(d);
        for (const auto& e : p.elements) {
            const auto pt = to_bloch(e.op, basis);
            EXPECT_NEAR((from_bloch(pt, basis, d) - e.op).max_abs(), 0.0, 1e-13);
        }
    }
}

TEST(Validation, RejectsInvalid)
{
    auto dup = bb84_povm();
    dup.elements[1].label = "z+";
    EXPECT_THROW(require_povm(dup), DomainError);

    auto neg = bb84_povm();
    neg.elements[0].op(0, 0) = 0.7;
    neg.elements[1].op(0, 0) = -0.2;
    EXPECT_THROW(require_povm(neg), DomainError);
    EXPECT_FALSE(validate_povm(neg).valid);

    auto incomplete = bb84_povm();
    incomplete.elements.pop_back();
    EXPECT_THROW(require_povm(incomplete), DomainError);
    EXPECT_GT(validate_povm(incomplete).identity_residual, 0.1);

    EXPECT_TRUE(validate_povm(bb84_povm()).valid);
}

TEST(Rank1, Expansion)
{
    const auto split = rank1_expand(Povm{2, {{"id", ComplexMatrix::identity(2)}}});
    ASSERT_EQ(split.povm.elements.size(), 2u);
    for (const auto& e : split.povm.elements) {
        EXPECT_EQ(split.relabel.at(e.label), "id");
        EXPECT_NE(e.label, "id");
    }
    const auto same = rank1_expand(bb84_povm());
    ASSERT_EQ(same.povm.elements.size(), 4u);
    EXPECT_EQ(same.povm.elements[2].label, "x+");
}

TEST(Extremality, KnownCases)
{
    EXPECT_FALSE(is_extremal(equatorial_povm(5)).extremal);
    EXPECT_FALSE(is_extremal(bb84_povm()).extremal);
    EXPECT_TRUE(is_extremal(equatorial_povm(3)).extremal);
    EXPECT_TRUE(is_extremal(equatorial_povm(2)).extremal);
    const auto witness = is_extremal(bb84_povm()).witness;
    ASSERT_EQ(witness.size(), 4u);
    ComplexMatrix combo(2, 2);
    const auto bb = bb84_povm();
    for (std::size_t i = 0; i < 4; ++i)
        combo += bb.elements[i].op * cplx(witness[i]);
    EXPECT_NEAR(combo.max_abs(), 0.0, 1e-12);
    EXPECT_THROW(is_extremal(Povm{2, {{"id", ComplexMatrix::identity(2)}}}), DomainError);
}

TEST(Vertex, InfeasibleCertificate)
{
    const auto p = qubit_pair_points();
    const auto basis = gellmann_basis(2);
    std::vector<BlochPoint> pts;
    for (const auto& e : p.elements)
        pts.push_back(to_bloch(e.op, basis));
    try {
        find_extremal_vertex(pts, 2);
        FAIL() << "expected infeasibility";
    } catch (const InfeasibleError& ex) {
        ASSERT_EQ(ex.certificate.size(), 3u);
        for (const auto& pt : pts) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k)
                dot += ex.certificate[k] * pt.vec[k];
            EXPECT_LT(dot, -1e-9);
        }
    }
}

TEST(Vertex, FeasibleVertex)
{
    const auto p = equatorial_povm(6);
    const auto basis = gellmann_basis(2);
    std::vector<BlochPoint> pts;
    for (const auto& e : p.elements)
        pts.push_back(to_bloch(e.op, basis));
    const auto x = find_extremal_vertex(pts, 2);
    ASSERT_EQ(x.size(), 6u);
    double weight = 0.0;
    std::vector<double> centroid(3, 0.0);
    int support = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_GE(x[i], 0.0);
        weight += x[i];
        support += x[i] > 0.0;
        for (int k = 0; k < 3; ++k)
            centroid[k] += x[i] * pts[i].vec[k];
    }
    EXPECT_NEAR(weight, 2.0, 1e-10);
    for (double c : centroid)
        EXPECT_NEAR(c, 0.0, 1e-10);
    EXPECT_LE(support, 4);
}

TEST(Decompose, BB84)
{
    const auto p = bb84_povm();
    const auto r = decompose(p);
    ASSERT_EQ(r.terms.size(), 2u);
    EXPECT_NEAR(r.terms[0].probability, 0.5, 1e-12);
    EXPECT_NEAR(r.terms[1].probability, 0.5, 1e-12);
    expect_valid_decomposition(p, r, 1e-12);
}

TEST(Decompose, Pentagon)
{
    const auto p = equatorial_povm(5);
    const auto r = decompose(p);
    expect_valid_decomposition(p, r, 1e-12);
    EXPECT_NEAR(r.terms[0].probability, 1.0 / std::sqrt(5.0), 1e-9);
}

TEST(Decompose, ExtremalInputIsSingleTerm)
{
    const auto p = equatorial_povm(3);
    const auto r = decompose(p);
    ASSERT_EQ(r.terms.size(), 1u);
    EXPECT_NEAR(r.terms[0].probability, 1.0, 1e-12);
}

TEST(Decompose, FewestOutcomesOrdering)
{
    const auto r = ordered_decompose(bb84_povm());
    ASSERT_FALSE(r.terms.empty());
    EXPECT_EQ(r.terms[0].extremal.elements.size(), 2u);
    expect_valid_decomposition(bb84_povm(), r, 1e-12);
    const auto hex = ordered_decompose(equatorial_povm(6));
    EXPECT_EQ(hex.terms[0].extremal.elements.size(), 2u);
    std::mt19937_64 gen(11);
    EXPECT_THROW(decompose(oracle::random_povm(3, 4, gen), DecompositionOrder::fewest_outcomes), UnsupportedCriterion);
}

TEST(Decompose, RandomPovms)
{
    std::mt19937_64 gen(7);
    for (int it = 0; it < 60; ++it) {
        const int d = 2 + it % 3;
        const int count = 2 + (it * 7) % (3 * d * d - 1);
        const auto p = oracle::random_povm(d, count, gen);
        const auto r = decompose(p);
        expect_valid_decomposition(p, r, 1e-9);
        const std::size_t expanded = rank1_expand(p).povm.elements.size();
        EXPECT_LE(r.terms.size(), (expanded - 1) * d + 1) << it;
    }
}

TEST(Decompose, RelabelPointsToOriginal)
{
    const Povm p{2, {{"id", ComplexMatrix::identity(2)}}};
    const auto r = decompose(p);
    ASSERT_EQ(r.terms.size(), 1u);
    for (const auto& e : r.terms[0].extremal.elements)
        EXPECT_EQ(r.relabel.at(e.label), "id");
    EXPECT_LT(reconstruction_error(p, r), 1e-12);
}

TEST(Json, RoundTrip)
{
    const auto p = equatorial_povm(5);
    const auto back = povm_from_json(nlohmann::json::parse(povm_to_json(p).dump()));
    ASSERT_EQ(back.dim, 2);
    ASSERT_EQ(back.elements.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(back.elements[i].label, p.elements[i].label);
        EXPECT_NEAR((back.elements[i].op - p.elements[i].op).max_abs(), 0.0, 1e-15);
    }
    const auto dumped = decomposition_to_json(decompose(bb84_povm())).dump();
    EXPECT_LT(dumped.find("\"terms\""), dumped.find("\"relabel\""));
}

TEST(Json, RealEntriesAccepted)
{
    const auto p = povm_from_json(nlohmann::json::parse(
        R"({"dim": 2, "elements": [{"label": "0", "matrix": [[1, 0], [0, 0]]}, {"label": "1", "matrix": [[0, 0], [0, 1]]}]})"));
    EXPECT_NO_THROW(require_povm(p));
}

TEST(Json, MalformedInput)
{
    using nlohmann::json;
    EXPECT_THROW(povm_from_json(json::parse(R"({"elements": []})")), DomainError);
    EXPECT_THROW(povm_from_json(json::parse(R"({"dim": 0, "elements": []})")), DomainError);
    EXPECT_THROW(povm_from_json(json::parse(R"({"dim": 2, "elements": [{"label": "a", "matrix": [[1, 0]]}]})")),
                 DomainError);
    EXPECT_THROW(povm_from_json(json::parse(R"({"dim": 2, "elements": [{"label": "a", "matrix": [[1], [0, 1]]}]})")),
                 DomainError);
    EXPECT_THROW(povm_from_json(json::parse(R"({"dim": 2, "elements": [{"matrix": [[1, 0], [0, 1]]}]})")), DomainError);
    EXPECT_THROW(read_povm_file("/nonexistent/povm.json"), DomainError);
}

TEST(Json, ShippedExamples)
{
    const std::string dir = QDL_DATA_DIR;
    const auto bb = read_povm_file(dir + "/bb84.json");
    EXPECT_NEAR(decompose(bb).terms[0].probability, 0.5, 1e-12);
    const auto pent = read_povm_file(dir + "/pentagon.json");
    EXPECT_NEAR(decompose(pent).terms[0].probability, 1.0 / std::sqrt(5.0), 1e-9);
}
