#pragma once

#include "lpf/fedosov.hpp"
#include "lpf/graded.hpp"
#include "lpf/liepair.hpp"

#include <vector>

namespace lpf {

// one-variable formal power series, coefficients c_0..c_K
using Series = std::vector<Rat>;

Series series_mul(const Series& a, const Series& b, int K);
Series series_inverse(const Series& a, int K); // needs a_0 != 0
Series series_log(const Series& a, int K);     // needs a_0 = 1
Series series_exp(const Series& a, int K);     // needs a_0 = 0
Series series_pow(const Series& a, const Rat& t, int K); // a_0 = 1, exp(t log a)

enum class ToddKind { Td, TTodd, SqrtTd, SqrtTTodd };

// td = x/(1-e^{-x}), ttodd = x/(e^{x/2}-e^{-x/2}), and their square roots
Series todd_series(ToddKind kind, int K);

// r x r matrix of even form-valued entries; (row j, col k) is the d_k-component of the
// endomorphism applied to d_j
struct FormMatrix {
    int r = 0;
    std::vector<GradedElement> e;

    FormMatrix() = default;
    explicit FormMatrix(int r_) : r(r_), e(static_cast<size_t>(r_) * r_) {}
    GradedElement& operator()(int j, int k) { return e[j * r + k]; }
    const GradedElement& operator()(int j, int k) const { return e[j * r + k]; }
    bool operator==(const FormMatrix& o) const { return r == o.r && e == o.e; }
};

FormMatrix matmul(const FormMatrix& a, const FormMatrix& b);
GradedElement trace(const FormMatrix& a);
FormMatrix map_entries(const FormMatrix& a, const std::function<GradedElement(const GradedElement&)>& f);

// R11 as a matrix of A^vee (x) B^vee entries: sum_{a,n} R11(a,n)_j^k lam_a th_n.
// Throws std::invalid_argument unless conn extends the Bott A-connection.
FormMatrix atiyah_cocycle_pair(const LiePairSpec& s, const ConnectionSpec& conn);

// canonical Atiyah cocycle of the Fedosov algebroid: sum_i d_i d_j f_k th_i with f_k the
// components of X; needs N >= 3
FormMatrix atiyah_cocycle_fedosov(const FedosovData& F);

// d_A on Lambda A^vee (x) Lambda B^vee (Bott action dual on Th)
Derivation ce_Aperp_derivation(const LiePairSpec& s);

// divergence sum_k d_k f_k of X and the algebroid differential g -> sum_i (d_i g) th_i
GradedElement divergence(const FedosovData& F);
GradedElement fedosov_d_function(const LiePairSpec& s, const GradedElement& g);

// components k = 0..K (Th-degree k) of det f(M) computed as exp(sum_s t_s tr M^s)
struct ToddCocycle {
    std::vector<GradedElement> components;
    GradedElement total() const;
};

ToddCocycle todd_cocycle(const FormMatrix& at, ToddKind kind, int K);
// same by expanding f(M) = sum c_s M^s and taking the determinant by cofactors (r <= 3)
GradedElement todd_determinant(const FormMatrix& at, ToddKind kind, int K);

// raw traces tr(M^k), k = 1..K (scalar classes before the (i/2pi)^k normalization)
std::vector<GradedElement> scalar_traces(const FormMatrix& at, int K);

// interior product of a form (words in Lam, Th, Chi, X) into a polyvector (Lam, Eps, Chi, X):
// lam^I th_{i1}..th_{ik} chi^J acts as lam^I chi^J d_{eps_{i1}} .. d_{eps_{ik}}
GradedElement contract_by(const GradedElement& form, const GradedElement& target);
// exp(t iota_form) applied to target; the form must contract to a nilpotent operator
GradedElement contract_exp(const GradedElement& form, const Rat& t, const GradedElement& target);

} // namespace lpf
