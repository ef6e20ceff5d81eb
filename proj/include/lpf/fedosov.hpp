#pragma once

#include "lpf/graded.hpp"
#include "lpf/liepair.hpp"

#include <functional>
#include <vector>

namespace lpf {

// Working algebra of a Lie pair: Lam_0..Lam_{l-1} (Lam_i, i >= rA, is q^T chi_{i-rA}),
// Chi_0..Chi_{r-1}, X_0..X_{m-1}; Eps_k stands for the vertical field d/dchi_k and
// Th_k for the fibre 1-form dual to it. delta, h, sigma, tau act on Lam and Chi only.

// degree +1 derivation with chi_m -> Lam_{rA+m}
GradedElement delta(const LiePairSpec& s, const GradedElement& a);
Derivation delta_derivation(const LiePairSpec& s);

// homotopy: words with v = #B-Lam >= 1 go to 1/(v+|J|) sum_k iota_{Lam_{rA+k}}(.) chi_k
GradedElement h_op(const LiePairSpec& s, const GradedElement& a);

// keeps words without B-Lam and without chi
GradedElement sigma(const LiePairSpec& s, const GradedElement& a);
// inclusion of Lambda A^vee (throws on words outside it)
GradedElement tau(const LiePairSpec& s, const GradedElement& a);

// vertical vector field sum_k f[k] d/dchi_k
using VField = std::vector<GradedElement>;

VField field_of(const LiePairSpec& s, const Derivation& D);
// derivation acting on chi by the field and by zero on Lam and X, lifted to Eps and Th
Derivation as_derivation(const LiePairSpec& s, const VField& f, int degree);
VField h_field(const LiePairSpec& s, const VField& f);
VField delta_field(const LiePairSpec& s, const VField& f);
VField sigma_field(const LiePairSpec& s, const VField& f);
bool is_zero(const VField& f);

// fill Eps and Th images of a derivation from its chi images (Lie derivative on
// vertical polyvectors and fibre forms): Eps_k -> -sum_m d_k(D chi_m) Eps_m,
// Th_k -> sum_m d_m(D chi_k) Th_m
Derivation vertical_lift(const LiePairSpec& s, Derivation D);

// covariant differential on Lam, Chi, X (dual connection on B^vee), lifted
Derivation connection_derivation(const LiePairSpec& s, const ConnectionSpec& conn, int N);

// the vertical field of (d^nabla)^2, i.e. the curvature acting as a derivation
VField curvature_field(const LiePairSpec& s, const ConnectionSpec& conn, int N);

// [delta, d^nabla] = 0 exactly when the connection is torsion-free
bool delta_anticommutes(const LiePairSpec& s, const ConnectionSpec& conn, int N);

struct FedosovData {
    LiePairSpec spec;
    ConnectionSpec conn;
    int N = 6;
    std::vector<VField> X; // X[k] for 2 <= k <= N, X[0], X[1] empty
    Derivation dnabla;
    Derivation Q; // -delta + d^nabla + sum X_k, lifted
};

// rebuild Q from dnabla and X (used after editing X)
Derivation assemble_Q(const LiePairSpec& s, const Derivation& dnabla, const std::vector<VField>& X, int N);

FedosovData fedosov_X(const LiePairSpec& s, const ConnectionSpec& conn, int N);

// 1/2 [Q, Q], keeping only image terms of symmetric degree < N (all must vanish)
Derivation q_square_residual(const FedosovData& F);
// same for an arbitrary derivation at cutoff N
Derivation square_residual(const Derivation& Q, int N);

// all image terms of symmetric degree >= N dropped
Derivation below(const Derivation& D, int N);
GradedElement below(const GradedElement& a, int N);

using LinOp = std::function<GradedElement(const GradedElement&)>;

// sigma tau = id, id - tau sigma = d_big h + h d_big, sigma h = 0, h tau = 0, h h = 0
struct Contraction {
    LinOp sigma, tau, h, d_big, d_small;
    int N = -1;
};

// contraction against d_big = -delta (h = -h_op, d_small = 0)
Contraction base_contraction(const LiePairSpec& s, int N);

// homological perturbation by a degree +1 derivation that does not lower symmetric
// degree; sigma stays unchanged
Contraction perturb_contraction(const Contraction& base, const Derivation& P, int N);

// base contraction perturbed by L_Q + delta, for vertical tensors of the Fedosov algebra
Contraction fedosov_contraction(const FedosovData& F);

using Bracket = std::function<GradedElement(const GradedElement&, const GradedElement&)>;
using DegreeFn = std::function<int(const Word&)>;

// L-infinity brackets l1, l2, l3 (Lie convention, l_n of degree 2 - n) transferred
// along a contraction from a dgla (d_big, bracket); inputs of l2, l3 must be homogeneous
struct TransferredBrackets {
    LinOp l1;
    Bracket l2;
    std::function<GradedElement(const GradedElement&, const GradedElement&, const GradedElement&)> l3;
};

TransferredBrackets transfer_brackets(const Contraction& c, const Bracket& bracket, const DegreeFn& degree,
                                      int max_arity = 3);

// degree of a homogeneous element, or throws
int element_degree(const GradedElement& a, const DegreeFn& degree);

// shifted polyvector degree: #Lam + #Eps - 1
int polyvector_degree(const Word& w);

} // namespace lpf
