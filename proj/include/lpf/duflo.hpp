#pragma once

#include "lpf/graded.hpp"
#include "lpf/liepair.hpp"
#include "lpf/pbw.hpp"

#include <string>
#include <vector>

namespace lpf {

// finite-dimensional Lie algebra with basis x_0..x_{n-1} in input order (n <= 8)
struct LieAlgebra {
    int n = 0;
    std::vector<Rat> c; // c[(i*n+j)*n+k]
    std::vector<std::string> names;

    const Rat& C(int i, int j, int k) const { return c[(i * n + j) * n + k]; }
};

// the full algebra L of a Lie algebra pair (constant structure constants)
LieAlgebra lie_algebra_of(const LiePairSpec& s);
Uea enveloping(const LieAlgebra& g);

// S(g) is stored as polynomials in the X generators, S^(g^vee) as series in the Chi generators
using SymElem = GradedElement;
using DualSeries = GradedElement;

Uea::Elem uea_product(const Uea& U, const Uea::Elem& a, const Uea::Elem& b);
// symmetrization: x_{i1}...x_{in} -> 1/n! sum over orderings
Uea::Elem pbw_sym(const Uea& U, const SymElem& s);
// adjoint action of x_a on S(g)
SymElem ad_sym(const LieAlgebra& g, int a, const SymElem& s);

// J(x) = det((1 - e^{-ad x}) / ad x) to order K, or its square root
DualSeries duflo_element(const LieAlgebra& g, int K, bool square_root);
// constant-coefficient operator: chi^I acts as d^I / dx^I (pairing <chi^I, x^I> = I!)
SymElem apply_duflo(const DualSeries& J, const SymElem& s);

// bases of S(g)^g (homogeneous pieces of degree 0..d) and of U(g)^g in filtration <= d
std::vector<SymElem> sym_invariants(const LieAlgebra& g, int d);
std::vector<Uea::Elem> uea_invariants(const LieAlgebra& g, int d);

struct DufloPair {
    SymElem p, q;
    bool multiplicative = false;     // pbw J^1/2 (pq) = pbw J^1/2 p . pbw J^1/2 q
    Uea::Elem plain_discrepancy;     // pbw(pq) - pbw(p) pbw(q)
};

struct DufloReport {
    int degree = 0;
    std::vector<SymElem> invariants;
    std::vector<DufloPair> pairs;
    bool all_multiplicative() const;
    bool plain_discrepancy_seen() const;
};

// invariant basis elements p, q with deg p + deg q <= d
DufloReport duflo_check(const LieAlgebra& g, int d);

std::string uea_str(const LieAlgebra& g, const Uea::Elem& a);
std::string sym_str(const LieAlgebra& g, const SymElem& s);

} // namespace lpf
