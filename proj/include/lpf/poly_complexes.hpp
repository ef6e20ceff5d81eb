#pragma once

#include "lpf/graded.hpp"
#include "lpf/liepair.hpp"
#include "lpf/pbw.hpp"

#include <compare>
#include <map>
#include <vector>

namespace lpf {

// ---------------------------------------------------------------------------
// Polyvectors. A word lam^I eps^J chi^K x^M stands for lam^I chi^K x^M (x) b_J with
// the Eps slots as the B-part; the shifted degree is #Lam + #Eps - 1.

// Schouten bracket data: [eps_i, .] as degree-0 derivations. For a function generator
// g (Lam, Chi, X), [g, eps_j] = -[eps_j, g] and functions bracket to zero.
struct SchoutenData {
    int nlam = 0, neps = 0, nchi = 0, nx = 0;
    std::vector<Derivation> ad_eps;
};

// vertical polyvectors sum f d/dchi_J with Lam as constant odd coefficients
SchoutenData vertical_schouten(int nlam, int r, int nx = 0);
// pair side of a matched pair (B = span eta_{rA..} closed under the bracket):
// [b_m, lam_a] is the B-action on A^vee, [b_m, b_n] the bracket in B.
// Throws std::domain_error when B is not a subalgebra (the bracket is not defined).
SchoutenData matched_pair_schouten(const LiePairSpec& s);

// graded Lie bracket of degree -1 in the word degree (degree 0 on the shifted grading)
GradedElement schouten(const SchoutenData& d, const GradedElement& a, const GradedElement& b);

// d_A^Bott on Lambda A^vee (x) Lambda B: CE on Lam_0..Lam_{rA-1} and X,
// eps_m -> sum_a lam_a nabla^Bott_{a} b_m
Derivation ce_T_derivation(const LiePairSpec& s);
GradedElement ce_d_T(const LiePairSpec& s, const GradedElement& x);

// ---------------------------------------------------------------------------
// Pair-side polydifferential operators for Lie algebra pairs (point base).
// D^0 = U(g)/U(g)h is identified with normal-ordered monomials b^J, where the PBW
// order puts the B-frame before the A-frame; D^q has q+1 tensor factors and q = -1
// is the ground field.

using D0 = std::map<Exps, Rat>;

class PairPbw {
public:
    explicit PairPbw(const LiePairSpec& s);

    const LiePairSpec& spec() const { return s_; }
    int r() const { return s_.r(); }
    int rA() const { return s_.rA; }

    // a_j . u reduced modulo U(g)h
    D0 act(int a, const D0& u) const;
    // x . u for an arbitrary frame vector, reduced (used for B-frame left multiplication)
    D0 left_multiply(int frame, const D0& u) const;
    Uea::Elem lift(const Exps& J) const;
    D0 reduce(const Uea::Elem& e) const;

private:
    LiePairSpec s_;
    Uea u_;
    int pos(int frame) const;
};

// comultiplication; keys (left, right)
std::map<std::pair<Exps, Exps>, Rat> comultiply(const D0& u);

struct DKey {
    std::uint32_t lam = 0; // Lam_a, a < rA
    std::vector<Exps> u;   // tensor factors
    auto operator<=>(const DKey&) const = default;
    bool operator==(const DKey&) const = default;
    int p() const;
    int q() const { return static_cast<int>(u.size()) - 1; }
    int total() const { return p() + q(); }
    int pbw_degree() const;
};

struct PolyDiffOp {
    std::map<DKey, Rat> terms;

    void add(const DKey& k, const Rat& c);
    bool is_zero() const { return terms.empty(); }
    PolyDiffOp& operator+=(const PolyDiffOp& o);
    PolyDiffOp& operator-=(const PolyDiffOp& o);
    PolyDiffOp& operator*=(const Rat& c);
    bool operator==(const PolyDiffOp& o) const { return terms == o.terms; }
    std::string str(const LiePairSpec& s) const;
};

PolyDiffOp operator+(PolyDiffOp a, const PolyDiffOp& b);
PolyDiffOp operator-(PolyDiffOp a, const PolyDiffOp& b);
PolyDiffOp operator*(const Rat& c, PolyDiffOp a);

// 1 (x) u + sum (-1)^i ... Delta(u_i) ... + (-1)^{k+1} u (x) 1, coefficientwise in Lambda A^vee
PolyDiffOp hochschild_d(const PolyDiffOp& x);
// d_A^U: CE on the form part plus sum_a lam_a ^ (a acting on the tensor by Leibniz)
PolyDiffOp ce_d_D(const PairPbw& P, const PolyDiffOp& x);
// d_A^U + (-1)^p d_H
PolyDiffOp total_d_D(const PairPbw& P, const PolyDiffOp& x);

// skew-symmetrization with 1/n!; input words in Lam_{<rA} and Eps only
PolyDiffOp hkr(const LiePairSpec& s, const GradedElement& x);

// ---------------------------------------------------------------------------
// Cohomology of the finite filtered pieces (T: at most `cutoff` B-slots; D: normalized
// cochains of total PBW degree <= cutoff) in total degrees [lo, hi].

enum class Side { T, D };

struct CohomologyResult {
    Side side = Side::T;
    int lo = 0, hi = 0, cutoff = 0;
    std::vector<int> cochain_dims; // per degree lo..hi
    std::vector<int> ranks;
    std::vector<std::vector<GradedElement>> t_reps; // side T
    std::vector<std::vector<PolyDiffOp>> d_reps;    // side D
};

CohomologyResult cohomology(const LiePairSpec& s, Side side, int lo, int hi, int cutoff);

struct HkrComparison {
    int lo = 0, hi = 0, cutoff = 0;
    std::vector<int> rank_T, rank_D, rank_map;
    bool rank_preserving() const;
};

HkrComparison hkr_comparison(const LiePairSpec& s, int lo, int hi, int cutoff);

// ---------------------------------------------------------------------------
// Vertical polydifferential operators on the fibre algebra: sum over tuples
// (J_0..J_q) of coefficient * d^{J_0} (x) ... (x) d^{J_q}; coefficients live in
// Lambda L^vee (x) S B^vee (Lam, Chi, X). The Lam part is a constant odd coefficient.

struct VDiffOp {
    std::map<std::vector<Exps>, GradedElement> terms;
    int trunc = -1;

    void add(const std::vector<Exps>& key, const GradedElement& c);
    bool is_zero() const { return terms.empty(); }
    VDiffOp& operator+=(const VDiffOp& o);
    VDiffOp& operator-=(const VDiffOp& o);
    VDiffOp& operator*=(const Rat& c);
    bool operator==(const VDiffOp& o) const;
    std::string str() const;
};

VDiffOp operator+(VDiffOp a, const VDiffOp& b);
VDiffOp operator-(VDiffOp a, const VDiffOp& b);
VDiffOp operator*(const Rat& c, VDiffOp a);

// the multiplication m(f, g) = fg
VDiffOp multiplication_op(int trunc = -1);
// evaluate on even arguments (Chi, X only)
GradedElement apply(const VDiffOp& op, const std::vector<GradedElement>& args);
// d^J f on Chi
GradedElement chi_derivative(const Exps& J, const GradedElement& f);

// phi * psi = sum_k (-1)^{kv} phi(..., psi(...), ...), extended over Lam coefficients
VDiffOp star(const VDiffOp& a, const VDiffOp& b);
// phi * psi - (-1)^{uv} psi * phi on total degrees
VDiffOp gerstenhaber(const VDiffOp& a, const VDiffOp& b);
// pair-side invocation: always throws std::domain_error
[[noreturn]] void gerstenhaber(const PolyDiffOp&, const PolyDiffOp&);

// skew-symmetrization of vertical polyvectors; words in Lam, Eps, Chi, X
VDiffOp vertical_hkr(const GradedElement& x);

// total degree of a homogeneous vertical operator (#Lam + q), throws otherwise
int vdiff_degree(const VDiffOp& x);

} // namespace lpf
