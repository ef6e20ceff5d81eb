#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lpf/duflo.hpp"
#include "support.hpp"

using namespace lpf;
using namespace lpf::test;

namespace {

GradedElement xg(int i) { return GradedElement::gen({Gen::X, i}); }
GradedElement chi(int i, int K) { return GradedElement::gen({Gen::Chi, i}, K); }

// so(3) with [x0,x1] = x2 and cyclic
LieAlgebra so3()
{
    LieAlgebra g;
    g.n = 3;
    g.c.assign(27, Rat(0));
    auto set = [&](int i, int j, int k) {
        g.c[(i * 3 + j) * 3 + k] = 1;
        g.c[(j * 3 + i) * 3 + k] = -1;
    };
    set(0, 1, 2);
    set(1, 2, 0);
    set(2, 0, 1);
    g.names = {"x", "y", "z"};
    return g;
}

SymElem random_sym(std::mt19937_64& g, int n, int maxdeg)
{
    Shape sh;
    sh.nlam = 0;
    sh.nchi = 0;
    sh.nx = n;
    sh.max_xdeg = maxdeg;
    return random_element(g, sh);
}

Uea::Elem random_uea(std::mt19937_64& g, int n, int len)
{
    Uea::Elem e;
    for (int t = 0; t < 3; ++t) {
        Uea::Mono m;
        int l = static_cast<int>(g() % (len + 1));
        for (int i = 0; i < l; ++i) m.push_back(static_cast<int>(g() % n));
        e[m] += random_rat(g, 4);
    }
    return e;
}

// sum_m c_m y^m truncated at K, for y a Chi polynomial
GradedElement series_in(const std::vector<Rat>& c, const GradedElement& y, int K)
{
    GradedElement out(K), p = GradedElement::one(K);
    for (size_t m = 0; m < c.size(); ++m) {
        if (m) p = p * y;
        out += c[m] * p;
    }
    return out;
}

} // namespace

TEST_CASE("enveloping algebra products and symmetrization")
{
    auto g = lie_algebra_of(sl2_pair());
    auto U = enveloping(g);
    // e f - f e = h
    auto e = Uea::basis(0), h = Uea::basis(1), f = Uea::basis(2);
    CHECK(U.commutator(e, f) == h);
    // (ef + fe)/2 = ef - h/2 in the order e, h, f
    Uea::Elem expect{{{0, 2}, Rat(1)}, {{1}, rat(-1, 2)}};
    CHECK(pbw_sym(U, xg(0) * xg(2)) == expect);
    CHECK(pbw_sym(U, GradedElement::one()) == Uea::one());

    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_uea(rng, 3, 3), b = random_uea(rng, 3, 3), c = random_uea(rng, 3, 2);
        CHECK(uea_product(U, uea_product(U, a, b), c) == uea_product(U, a, uea_product(U, b, c)));
        // symmetrization is g-equivariant
        auto s = random_sym(rng, 3, 3);
        for (int i = 0; i < 3; ++i) CHECK(pbw_sym(U, ad_sym(g, i, s)) == U.commutator(Uea::basis(i), pbw_sym(U, s)));
        // leading term of a monomial is its normal-ordered word with coefficient one
        Word w;
        for (int i = 0; i < 3; ++i) w.x[i] = static_cast<std::uint8_t>(rng() % 3);
        auto u = pbw_sym(U, GradedElement::monomial(w, 1));
        Uea::Mono lead;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < w.x[i]; ++k) lead.push_back(i);
        CHECK(u.at(lead) == 1);
        for (const auto& [m, coef] : u)
            if (m != lead) CHECK(m.size() < lead.size());
    }
}

TEST_CASE("invariants")
{
    auto g = lie_algebra_of(sl2_pair());
    auto S = sym_invariants(g, 4);
    REQUIRE(S.size() == 3); // 1, C, C^2
    for (const auto& p : S)
        for (int a = 0; a < 3; ++a) CHECK(ad_sym(g, a, p).is_zero());
    // the quadratic invariant is proportional to 4ef + h^2
    SymElem cas = 4 * xg(0) * xg(2) + xg(1) * xg(1);
    auto q = S[1];
    Rat ratio = q.terms.begin()->second / cas.terms.at(q.terms.begin()->first);
    CHECK(q == ratio * cas);

    auto Ui = uea_invariants(g, 2);
    CHECK(Ui.size() == 2);
    auto U = enveloping(g);
    for (const auto& u : Ui)
        for (int a = 0; a < 3; ++a) CHECK(U.commutator(Uea::basis(a), u).empty());

    CHECK(sym_invariants(lie_algebra_of(solvable_pair()), 4).size() == 1);
    CHECK(sym_invariants(lie_algebra_of(abelian_pair(2, 1)), 2).size() == 6);
    CHECK(sym_invariants(so3(), 4).size() == 3);
}

TEST_CASE("Duflo element")
{
    const int K = 6;
    // sl2: J = 2 (cosh a - 1) / a^2 with a^2 = 4 chi_h^2 + 4 chi_e chi_f
    auto g = lie_algebra_of(sl2_pair());
    GradedElement a2 = 4 * chi(1, K) * chi(1, K) + 4 * chi(0, K) * chi(2, K);
    std::vector<Rat> cosh_c;
    for (int m = 0; 2 * m <= K; ++m) cosh_c.push_back(2 / factorial(2 * m + 2));
    auto J = duflo_element(g, K, false);
    CHECK(J == series_in(cosh_c, a2, K));

    // solvable: ad_x has eigenvalues 0 and chi_a, J = (1 - e^{-y}) / y at y = chi_a
    auto sv = lie_algebra_of(solvable_pair());
    std::vector<Rat> f;
    for (int n = 0; n <= K; ++n) f.push_back((n % 2 ? Rat(-1) : Rat(1)) / factorial(n + 1));
    CHECK(duflo_element(sv, K, false) == series_in(f, chi(0, K), K));

    for (const auto& alg : {g, sv, so3()}) {
        auto h = duflo_element(alg, K, true);
        CHECK(h * h == duflo_element(alg, K, false));
    }
    CHECK(duflo_element(lie_algebra_of(abelian_pair()), K, true) == GradedElement::one(K));
}

TEST_CASE("Duflo operator action")
{
    // chi^I acts as d^I: <chi_0^2, x_0^2> = 2
    GradedElement c2 = GradedElement::gen({Gen::Chi, 0}) * GradedElement::gen({Gen::Chi, 0});
    CHECK(apply_duflo(c2, xg(0) * xg(0)) == GradedElement::scalar(2));
    CHECK(apply_duflo(c2, xg(0) * xg(0) * xg(1)) == 2 * xg(1));
    CHECK(apply_duflo(c2, xg(0)).is_zero());

    // J^1/2 = 1 + a^2/24 + ... on the sl2 Casimir: (8 + 16) / 24 = 1
    auto g = lie_algebra_of(sl2_pair());
    SymElem cas = 4 * xg(0) * xg(2) + xg(1) * xg(1);
    auto Jh = duflo_element(g, 4, true);
    CHECK(apply_duflo(Jh, cas) == cas + GradedElement::one());

    // J is invariant so its action commutes with ad
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_sym(rng, 3, 4);
        for (int a = 0; a < 3; ++a) CHECK(apply_duflo(Jh, ad_sym(g, a, s)) == ad_sym(g, a, apply_duflo(Jh, s)));
    }
}

TEST_CASE("Duflo multiplicativity on invariants")
{
    auto sl2 = duflo_check(lie_algebra_of(sl2_pair()), 4);
    CHECK(sl2.pairs.size() == 4); // (1,1) (1,C) (1,C^2) (C,C)
    CHECK(sl2.all_multiplicative());
    CHECK(sl2.plain_discrepancy_seen());

    auto so = duflo_check(so3(), 4);
    CHECK(so.all_multiplicative());
    CHECK(so.plain_discrepancy_seen());

    auto sv = duflo_check(lie_algebra_of(solvable_pair()), 4);
    CHECK(sv.all_multiplicative());

    auto ab = duflo_check(lie_algebra_of(abelian_pair(2, 1)), 4);
    CHECK(ab.all_multiplicative());
    CHECK(!ab.plain_discrepancy_seen());
}
