#pragma once

#include "lpf/graded.hpp"

#include <string>
#include <vector>

namespace lpf {

// Polynomials in the chart coordinates are GradedElements built from Gen::X only.
using Poly = GradedElement;

enum class BaseKind { Point, PolyChart };

// Frame convention: eta_0..eta_{rA-1} span A, eta_{rA}..eta_{l-1} are j(B).
// B-frame vector d_m is q(eta_{rA+m}).
struct LiePairSpec {
    BaseKind base = BaseKind::Point;
    int m = 0; // chart dimension
    int l = 0, rA = 0;
    std::vector<Poly> c;      // c[(i*l+j)*l+k] : [eta_i, eta_j] = sum_k c_ij^k eta_k
    std::vector<Poly> anchor; // anchor[i*m+a] : rho(eta_i) = sum_a anchor_ia d/dx_a
    std::vector<std::string> names;

    LiePairSpec() = default;
    LiePairSpec(int l_, int rA_, int m_ = 0);

    int r() const { return l - rA; }
    Poly& C(int i, int j, int k) { return c[(i * l + j) * l + k]; }
    const Poly& C(int i, int j, int k) const { return c[(i * l + j) * l + k]; }
    Poly& rho(int i, int a) { return anchor[i * m + a]; }
    const Poly& rho(int i, int a) const { return anchor[i * m + a]; }

    // rho(eta_i) applied to a polynomial
    Poly anchor_apply(int i, const Poly& f) const;
    // set c_ij^k and c_ji^k = -c_ij^k
    void set_bracket(int i, int j, int k, const Poly& v);
};

// nabla_{eta_i} d_j = sum_k G_ij^k d_k, i over L-frame, j,k over B-frame
struct ConnectionSpec {
    int l = 0, r = 0;
    std::vector<Poly> G;

    ConnectionSpec() = default;
    ConnectionSpec(int l_, int r_) : l(l_), r(r_), G(static_cast<size_t>(l_) * r_ * r_) {}
    Poly& operator()(int i, int j, int k) { return G[(i * r + j) * r + k]; }
    const Poly& operator()(int i, int j, int k) const { return G[(i * r + j) * r + k]; }
};

struct Violation {
    std::string identity;
    std::vector<int> witness;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
};

ValidationReport validate(const LiePairSpec& s);

// A-rows carry the Bott connection, B-rows are zero
ConnectionSpec bott_connection(const LiePairSpec& s);
bool extends_bott(const LiePairSpec& s, const ConnectionSpec& conn);

struct TorsionData {
    std::vector<Poly> T;   // T[(i*l+j)*r+k] : T(eta_i, eta_j) = sum_k T_ij^k d_k
    bool has_beta = false;
    std::vector<Poly> beta; // beta[(m*r+n)*r+k]
    bool zero() const;
};

TorsionData torsion(const LiePairSpec& s, const ConnectionSpec& conn);
ConnectionSpec make_torsion_free(const LiePairSpec& s, const ConnectionSpec& conn);

struct CurvatureData {
    int l = 0, rA = 0, r = 0;
    std::vector<Poly> R;   // R[((i*l+j)*r+m)*r+k] : R(eta_i,eta_j) d_m = sum_k R.. d_k
    std::vector<Poly> R11; // R11[((a*r+n)*r+m)*r+k] = R(eta_a, eta_{rA+n})_m^k
    std::vector<Poly> R02; // R02[((n*r+p)*r+m)*r+k] = R(eta_{rA+n}, eta_{rA+p})_m^k
    TorsionData T;

    const Poly& full(int i, int j, int m, int k) const { return R[((i * l + j) * r + m) * r + k]; }
    const Poly& r11(int a, int n, int m, int k) const { return R11[((a * r + n) * r + m) * r + k]; }
    const Poly& r02(int n, int p, int m, int k) const { return R02[((n * r + p) * r + m) * r + k]; }
};

CurvatureData curvature(const LiePairSpec& s, const ConnectionSpec& conn);

// Representation of the first `nframe` frame vectors (nframe = l for L, rA for A)
// on a free module of rank dim; act[i][f*dim+e] : eta_i . v_e = sum_f act_fe v_f
struct ModuleAction {
    int nframe = 0, dim = 0;
    std::vector<std::vector<Poly>> act;
};

// Bott A-module B^vee^{ncov} (x) B^{ncontra}; basis index is row-major over the factors
ModuleAction bott_module(const LiePairSpec& s, int ncov, int ncontra);

bool is_flat(const LiePairSpec& s, const ModuleAction& M);

// Cochains: one GradedElement (in Lam_0..Lam_{nframe-1} and X) per module basis vector.
using Cochain = std::vector<GradedElement>;

// CE differential of forms alone (module of rank 0 / trivial), on the first nframe frame vectors
Derivation ce_derivation(const LiePairSpec& s, int nframe);

Cochain ce_differential(const LiePairSpec& s, const ModuleAction& M, const Cochain& w);

// Atiyah cocycle R11 as an A-cochain with values in B^vee (x) B^vee (x) B (components (n,m,k))
Cochain atiyah_cochain(const LiePairSpec& s, const CurvatureData& R);

// Is w = d_A(phi) for a 0-cochain phi with polynomial coefficients of degree <= maxdeg?
bool is_coboundary(const LiePairSpec& s, const ModuleAction& M, const Cochain& w, int maxdeg);

} // namespace lpf
