// Acceptance gate: one PASS/FAIL line per criterion, tolerances and limits pinned below.

#include "cli.hpp"
#include "lpf/atiyah_todd.hpp"
#include "lpf/duflo.hpp"
#include "lpf/fedosov.hpp"
#include "lpf/kontsevich.hpp"
#include "lpf/poly_complexes.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace lpf;
using namespace lpf::test;

namespace {

constexpr int kRandomElements = 100;
constexpr int kContractionMaxSdeg = 6;
constexpr int kFedosovTrunc = 6;
constexpr int kToddOrder = 8;
constexpr long kWeightSamples = 1000000;
constexpr double kWeightSigmas = 3.0;
constexpr double kWeightAbs = 1e-2;
constexpr long kStarSamples = 10000000;
constexpr double kStarAbs = 1e-2;
constexpr int kDufloDegree = 4;
constexpr int kHkrFiltration = 4;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void info(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

GradedElement lam(int i, int N = -1) { return GradedElement::gen({Gen::Lam, i}, N); }
GradedElement eps(int i, int N = -1) { return GradedElement::gen({Gen::Eps, i}, N); }
GradedElement chi(int i, int N = -1) { return GradedElement::gen({Gen::Chi, i}, N); }

int sgn(int parity) { return parity % 2 ? -1 : 1; }

// ---------------------------------------------------------------------------

Outcome contraction_suite()
{
    Outcome o;
    auto s = sl2_pair();
    auto c = base_contraction(s, -1);
    std::mt19937_64 g(kSeed);
    Shape sh;
    sh.nlam = s.l;
    sh.nchi = s.r();
    sh.neps = s.r();
    sh.nth = s.r();
    sh.max_sdeg = kContractionMaxSdeg;
    sh.terms = 5;
    bool st = true, homotopy = true, sh0 = true, ht = true, hh = true, dd = true;
    for (int t = 0; t < kRandomElements; ++t) {
        auto x = random_element(g, sh);
        auto a = c.sigma(x);
        st = st && c.sigma(c.tau(a)) == a;
        homotopy = homotopy && x - c.tau(c.sigma(x)) == c.d_big(c.h(x)) + c.h(c.d_big(x));
        sh0 = sh0 && c.sigma(c.h(x)).is_zero();
        ht = ht && c.h(c.tau(a)).is_zero();
        hh = hh && c.h(c.h(x)).is_zero();
        dd = dd && delta(s, delta(s, x)).is_zero();
    }
    o.require(st, "sigma tau = id");
    o.require(homotopy, "id - tau sigma = dh + hd");
    o.require(sh0, "sigma h = 0");
    o.require(ht, "h tau = 0");
    o.require(hh, "h^2 = 0");
    o.require(dd, "delta^2 = 0");
    o.info(std::to_string(kRandomElements) + " random elements, S-degree <= " + std::to_string(kContractionMaxSdeg) + ", pair (3,1)");
    return o;
}

// chi_k -> -1/2 sum lam_i lam_j R(eta_i, eta_j)_m^k chi_m, straight from the curvature tensor
VField curvature_oracle(const LiePairSpec& s, const CurvatureData& R, int N)
{
    VField f(s.r(), GradedElement(N));
    for (int k = 0; k < s.r(); ++k)
        for (int i = 0; i < s.l; ++i)
            for (int j = 0; j < s.l; ++j)
                for (int m = 0; m < s.r(); ++m)
                    if (!R.full(i, j, m, k).is_zero()) f[k] += rat(-1, 2) * R.full(i, j, m, k) * lam(i, N) * lam(j, N) * chi(m, N);
    return f;
}

Outcome fedosov_criterion()
{
    Outcome o;
    auto s = sl2_pair();
    auto conn = torsion_free_connection(s);
    auto F = fedosov_X(s, conn, kFedosovTrunc);
    o.require(F.X[2] == h_field(s, curvature_oracle(s, curvature(s, conn), kFedosovTrunc)), "X_2 = h(R)");
    bool gauge = true;
    for (int k = 2; k <= kFedosovTrunc; ++k) gauge = gauge && is_zero(h_field(s, F.X[k]));
    o.require(gauge, "h(X) = 0");
    o.require(is_zero(q_square_residual(F)), "q_square_residual = 0");
    o.info("sl2 pair, torsion-free extension, N = " + std::to_string(kFedosovTrunc));
    return o;
}

Outcome atiyah_criterion()
{
    Outcome o;
    auto s = sl2_pair();
    auto conn = torsion_free_connection(s);
    auto F = fedosov_X(s, conn, kFedosovTrunc);
    auto at = atiyah_cocycle_fedosov(F);
    auto sig = [&](const GradedElement& x) { return sigma(s, x); };
    auto pair = atiyah_cocycle_pair(s, conn);
    o.require(map_entries(at, sig) == pair, "sigma(At_F) = R11");
    o.require(trace(at) == fedosov_d_function(s, divergence(F)), "trace At_F = d_F(div X)");
    bool nonzero = false;
    for (const auto& e : pair.e) nonzero = nonzero || !e.is_zero();
    o.require(nonzero, "R11 nonzero on sl2");
    o.info("sl2 pair, N = " + std::to_string(kFedosovTrunc));
    return o;
}

// Bernoulli numbers B_0..B_K with B_1 = +1/2 (Akiyama-Tanigawa)
std::vector<Rat> bernoulli_plus(int K)
{
    std::vector<Rat> b(K + 1), a(K + 1);
    for (int n = 0; n <= K; ++n) {
        a[n] = Rat(1) / (n + 1);
        for (int j = n; j >= 1; --j) a[j - 1] = j * (a[j - 1] - a[j]);
        b[n] = a[0];
    }
    return b;
}

// x / (1 - e^{-x}) by long division of x by the series of 1 - e^{-x}
Series long_division_td(int K)
{
    // (1 - e^{-x}) / x = sum_k (-1)^k x^k / (k+1)!
    std::vector<Rat> den(K + 1);
    for (int k = 0; k <= K; ++k) den[k] = Rat(k % 2 ? -1 : 1) / factorial(k + 1);
    Series q(K + 1);
    std::vector<Rat> rem(K + 1);
    rem[0] = 1;
    for (int n = 0; n <= K; ++n) {
        q[n] = rem[n] / den[0];
        for (int k = 0; n + k <= K; ++k) rem[n + k] -= q[n] * den[k];
    }
    return q;
}

Outcome todd_criterion()
{
    Outcome o;
    const int K = kToddOrder;
    auto td = todd_series(ToddKind::Td, K);
    auto b = bernoulli_plus(K);
    Series bern(K + 1);
    for (int n = 0; n <= K; ++n) bern[n] = b[n] / factorial(n);
    o.require(td == long_division_td(K), "td = long-division oracle");
    o.require(td == bern, "td = Bernoulli oracle");

    auto tt = todd_series(ToddKind::TTodd, K);
    bool odd = true;
    for (int k = 1; k <= K; k += 2) odd = odd && tt[k] == 0;
    o.require(odd, "ttodd odd coefficients = 0");
    // x / (2 sinh(x/2)) = sum (2^{1-n} - 1) B_n x^n / n!
    Series tt_oracle(K + 1);
    for (int n = 0; n <= K; ++n) {
        Rat bn = n == 1 ? rat(-1, 2) : b[n];
        Rat p = 1;
        for (int j = 0; j < n - 1; ++j) p /= 2;
        if (n == 0) p = 2;
        tt_oracle[n] = (p - 1) * bn / factorial(n);
    }
    o.require(tt == tt_oracle, "ttodd = Bernoulli-polynomial oracle");
    for (auto [root, full] : {std::pair{ToddKind::SqrtTd, ToddKind::Td}, std::pair{ToddKind::SqrtTTodd, ToddKind::TTodd}}) {
        auto r = todd_series(root, K);
        o.require(series_mul(r, r, K) == todd_series(full, K), "sqrt^2 = original");
    }
    o.info("order " + std::to_string(K));
    return o;
}

Outcome complexes_criterion()
{
    Outcome o;
    std::mt19937_64 g(kSeed + 5);

    // CE: d^2 = 0 on forms and on the Bott module B^vee (x) B
    bool ce = true;
    for (auto s : {sl2_pair(), solvable_pair()}) {
        auto D = ce_derivation(s, s.l);
        Shape sh;
        sh.nlam = s.l;
        sh.nchi = 0;
        for (int t = 0; t < 20; ++t) {
            auto x = random_element(g, sh);
            ce = ce && apply(D, apply(D, x)).is_zero();
        }
        auto M = bott_module(s, 1, 1);
        Shape ash;
        ash.nlam = s.rA;
        ash.nchi = 0;
        ash.terms = 2;
        for (int t = 0; t < 10; ++t) {
            Cochain w(M.dim);
            for (auto& e : w) e = random_element(g, ash);
            auto dw = ce_differential(s, M, ce_differential(s, M, w));
            for (const auto& e : dw) ce = ce && e.is_zero();
        }
    }
    o.require(ce, "CE d^2 = 0");

    // Hochschild, d_A^U, and the total differential on the pair side
    auto s = sl2_pair();
    PairPbw P(s);
    bool hoch = true, cedu = true, total = true;
    for (int t = 0; t < 20; ++t) {
        PolyDiffOp x;
        for (int k = 0; k < 4; ++k) {
            DKey key;
            key.lam = static_cast<std::uint32_t>(g() % 2);
            int n = static_cast<int>(g() % 4);
            for (int i = 0; i < n; ++i) {
                Exps e{};
                int d = 1 + static_cast<int>(g() % 2);
                for (int j = 0; j < d; ++j) e[g() % s.r()]++;
                key.u.push_back(e);
            }
            x.add(key, random_rat(g, 4));
        }
        hoch = hoch && hochschild_d(hochschild_d(x)).is_zero();
        cedu = cedu && ce_d_D(P, ce_d_D(P, x)).is_zero();
        total = total && total_d_D(P, total_d_D(P, x)).is_zero();
    }
    o.require(hoch, "Hochschild d^2 = 0");
    o.require(cedu && total, "d_A^U and d_H anticommute (total d^2 = 0)");

    // Fedosov double complex: delta and d^nabla anticommute for a torsion-free connection
    o.require(delta_anticommutes(s, torsion_free_connection(s), 5), "[delta, d^nabla] = 0");

    // Schouten: graded antisymmetry, Jacobi, Leibniz
    auto sd = vertical_schouten(2, 2);
    Shape sh;
    sh.nlam = 2;
    sh.neps = 2;
    sh.nchi = 2;
    sh.max_sdeg = 2;
    sh.terms = 2;
    bool anti = true, jac = true, leib = true;
    for (int t = 0; t < 30; ++t) {
        int da = static_cast<int>(g() % 4), db = static_cast<int>(g() % 4), dc = static_cast<int>(g() % 4);
        auto a = random_homogeneous(g, sh, da), b = random_homogeneous(g, sh, db), c = random_homogeneous(g, sh, dc);
        int sa = da - 1, sb = db - 1;
        anti = anti && schouten(sd, a, b) == -sgn(sa * sb) * schouten(sd, b, a);
        jac = jac && (schouten(sd, a, schouten(sd, b, c)) - schouten(sd, schouten(sd, a, b), c) -
                      sgn(sa * sb) * schouten(sd, b, schouten(sd, a, c)))
                         .is_zero();
        leib = leib && schouten(sd, a, b * c) == schouten(sd, a, b) * c + sgn(sa * db) * (b * schouten(sd, a, c));
    }
    o.require(anti && jac && leib, "Schouten antisymmetry/Jacobi/Leibniz");

    // Gerstenhaber: antisymmetry, Jacobi, [m, m] = 0, d_H = [m, .] is a derivation of the bracket
    auto m = multiplication_op();
    o.require(gerstenhaber(m, m).is_zero(), "[m, m] = 0");
    auto random_op = [&](int arity, int lams) {
        VDiffOp x;
        for (int t = 0; t < 3; ++t) {
            std::vector<Exps> key;
            for (int i = 0; i < arity; ++i) {
                Exps e{};
                int d = static_cast<int>(g() % 3);
                for (int j = 0; j < d; ++j) e[g() % 2]++;
                key.push_back(e);
            }
            Word w;
            while (std::popcount(w.lam) < lams) w.lam |= 1u << (g() % 2);
            int deg = static_cast<int>(g() % 3);
            for (int i = 0; i < deg; ++i) w.chi[g() % 2]++;
            x.add(key, GradedElement::monomial(w, random_rat(g, 4)));
        }
        return x;
    };
    bool ganti = true, gjac = true, gder = true;
    for (int t = 0; t < 15; ++t) {
        auto a = random_op(1 + static_cast<int>(g() % 2), static_cast<int>(g() % 2));
        auto b = random_op(1 + static_cast<int>(g() % 2), static_cast<int>(g() % 2));
        auto c = random_op(1 + static_cast<int>(g() % 2), static_cast<int>(g() % 2));
        if (a.is_zero() || b.is_zero() || c.is_zero()) continue;
        int da = vdiff_degree(a), db = vdiff_degree(b);
        VDiffOp flip = gerstenhaber(b, a);
        flip *= -sgn(da * db);
        ganti = ganti && gerstenhaber(a, b) == flip;
        VDiffOp third = gerstenhaber(b, gerstenhaber(a, c));
        third *= sgn(da * db);
        gjac = gjac && (gerstenhaber(a, gerstenhaber(b, c)) - gerstenhaber(gerstenhaber(a, b), c) - third).is_zero();
        VDiffOp rhs = gerstenhaber(a, gerstenhaber(m, b));
        rhs *= sgn(da);
        gder = gder && gerstenhaber(m, gerstenhaber(a, b)) == gerstenhaber(gerstenhaber(m, a), b) + rhs;
    }
    o.require(ganti && gjac, "Gerstenhaber antisymmetry/Jacobi");
    o.require(gder, "d_H derivation of the Gerstenhaber bracket");
    o.info("CE, Hochschild, total, Fedosov, Schouten and Gerstenhaber on random inputs");
    return o;
}

GradedElement random_polyvector(std::mt19937_64& g, const LiePairSpec& s, int terms)
{
    Shape sh;
    sh.nlam = s.rA;
    sh.neps = s.r();
    sh.nchi = 0;
    sh.terms = terms;
    return random_element(g, sh);
}

Outcome hkr_criterion()
{
    Outcome o;
    std::mt19937_64 g(kSeed + 6);
    bool hoch = true, chain = true;
    for (auto s : {sl2_pair(), solvable_pair()}) {
        PairPbw P(s);
        for (int t = 0; t < 30; ++t) {
            auto x = random_polyvector(g, s, 4);
            hoch = hoch && hochschild_d(hkr(s, x)).is_zero();
            chain = chain && total_d_D(P, hkr(s, x)) == hkr(s, ce_d_T(s, x));
        }
    }
    o.require(hoch, "d_H hkr = 0");
    o.require(chain, "hkr d_T = d_D hkr");
    auto cmp = hkr_comparison(solvable_pair(), -1, 3, kHkrFiltration);
    o.require(cmp.rank_preserving(), "rank-equal on cohomology");
    std::ostringstream os;
    os << "solvable ranks T/D/map through filtration " << kHkrFiltration << ": ";
    for (size_t i = 0; i < cmp.rank_T.size(); ++i) os << cmp.rank_T[i] << "/" << cmp.rank_D[i] << "/" << cmp.rank_map[i] << " ";
    o.info(os.str());
    return o;
}

AdmissibleGraph hkr_graph(int m)
{
    AdmissibleGraph g;
    g.n = 1;
    g.m = m;
    g.out = {{}};
    for (int l = 0; l < m; ++l) g.out[0].push_back(1 + l);
    return g;
}

Outcome weights_criterion()
{
    Outcome o;
    for (int m : {1, 2}) {
        auto w = weight(hkr_graph(m), WeightMode{});
        o.require(w.is_exact() && w.exact == Rat(1) / (factorial(m) * factorial(m)), "closed form 1/(m!)^2 at m = " + std::to_string(m));
    }
    auto mc = monte_carlo_weight(hkr_graph(2), kWeightSamples, kSeed);
    const double err = std::abs(mc.value - 0.25);
    o.require(err <= kWeightSigmas * mc.stderr_, "MC within 3 SE");
    o.require(err <= kWeightAbs, "MC |err| <= 1e-2");
    o.info(fmt("m = 2 MC at 1e6 samples: %.6f +- %.6f (%.2f SE)", mc.value, mc.stderr_, err / mc.stderr_));
    return o;
}

Outcome star_criterion()
{
    Outcome o;
    TaylorOptions opt;
    opt.mode.samples = kStarSamples;
    opt.mode.seed = kSeed;
    auto S = star_product(eps(0) * eps(1), 2, 2, opt);
    std::vector<GradedElement> mons;
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b) {
            Word w;
            w.chi[0] = static_cast<std::uint8_t>(a);
            w.chi[1] = static_cast<std::uint8_t>(b);
            mons.push_back(GradedElement::monomial(w, 1));
        }
    bool product = true;
    Discrepancy worst;
    double worst_sigmas = 0.0;
    for (const auto& f : mons)
        for (const auto& gg : mons) {
            auto fg = star_apply(S, {to_numeric(f)}, {to_numeric(gg)});
            product = product && compare(fg[0], to_numeric(f * gg)).max_abs == 0 && fg[0].begin()->second.var == 0;
            for (const auto& h : mons) {
                auto lhs = star_apply(S, star_apply(S, {to_numeric(f)}, {to_numeric(gg)}), {to_numeric(h)});
                auto rhs = star_apply(S, {to_numeric(f)}, star_apply(S, {to_numeric(gg)}, {to_numeric(h)}));
                auto d = compare(lhs[2], rhs[2]);
                if (d.max_abs > worst.max_abs) worst = d;
                worst_sigmas = std::max(worst_sigmas, d.max_sigmas);
            }
        }
    o.require(product, "hbar^0 = fg exactly");
    o.require(worst.max_abs <= kStarAbs, "associativity residual <= 1e-2");
    o.require(worst.max_abs <= std::max(worst.max_error, 1e-12) * 4.0, "residual within 4 propagated SE");
    o.info(fmt("pi = d0^d1, monomials deg <= 3, %.0e samples/graph: residual %.5f, propagated error %.5f", static_cast<double>(kStarSamples),
               worst.max_abs, worst.max_error));
    return o;
}

Outcome duflo_criterion()
{
    Outcome o;
    auto g = lie_algebra_of(sl2_pair());
    auto r = duflo_check(g, kDufloDegree);
    o.require(r.invariants.size() >= 3, "invariants up to degree 4 found");
    o.require(r.all_multiplicative(), "pbw o J^1/2 multiplicative");
    o.require(r.plain_discrepancy_seen(), "plain pbw discrepancy nonzero");
    o.info(std::to_string(r.invariants.size()) + " invariants, " + std::to_string(r.pairs.size()) + " pairs");
    return o;
}

int shifted(const GradedElement& a) { return element_degree(a, polyvector_degree); }

GradedElement homogeneous_part(const GradedElement& x)
{
    if (x.is_zero()) return x;
    int d = x.terms.begin()->first.degree();
    return x.filter([d](const Word& w) { return w.degree() == d; });
}

Outcome linf_criterion()
{
    Outcome o;
    std::mt19937_64 g(kSeed + 10);
    const int N = 5;
    {
        auto s = solvable_pair();
        auto F = fedosov_X(s, torsion_free_connection(s), N);
        auto c = fedosov_contraction(F);
        auto d = vertical_schouten(s.l, s.r());
        auto br = [&](const GradedElement& a, const GradedElement& b) { return schouten(d, a, b); };
        auto T = transfer_brackets(c, br, polyvector_degree);
        bool unary = true, a1 = true, a2 = true, a3 = true;
        for (int t = 0; t < 20; ++t) {
            auto x = random_polyvector(g, s, 3);
            unary = unary && T.l1(x) == ce_d_T(s, x);
            a1 = a1 && T.l1(T.l1(x)).is_zero();
        }
        for (int t = 0; t < 10; ++t) {
            auto a = homogeneous_part(random_polyvector(g, s, 2)), b = homogeneous_part(random_polyvector(g, s, 2)),
                 cc = homogeneous_part(random_polyvector(g, s, 2));
            if (a.is_zero() || b.is_zero() || cc.is_zero()) continue;
            int da = shifted(a), db = shifted(b), dc = shifted(cc);
            a2 = a2 && T.l1(T.l2(a, b)) == T.l2(T.l1(a), b) + sgn(da) * T.l2(a, T.l1(b));
            auto rel = T.l2(T.l2(a, b), cc) - sgn(db * dc) * T.l2(T.l2(a, cc), b) + sgn(da * (db + dc)) * T.l2(T.l2(b, cc), a) +
                       T.l1(T.l3(a, b, cc)) + T.l3(T.l1(a), b, cc) + sgn(da) * T.l3(a, T.l1(b), cc) + sgn(da + db) * T.l3(a, b, T.l1(cc));
            a3 = a3 && rel.is_zero();
        }
        o.require(unary, "l1 = d_A^Bott");
        o.require(a1 && a2 && a3, "L-infinity relations through arity 3");
    }
    // matched pairs: the bundled (sl2, e) pair and the three-dimensional solvable pair p, t, q
    LiePairSpec mp(3, 1);
    mp.set_bracket(1, 0, 0, GradedElement::one());
    mp.set_bracket(1, 2, 2, GradedElement::scalar(-1));
    bool binary = true;
    for (const auto& s : {sl2_pair(), mp}) {
        auto F = fedosov_X(s, torsion_free_connection(s), N);
        auto c = fedosov_contraction(F);
        auto d = vertical_schouten(s.l, s.r());
        auto br = [&](const GradedElement& a, const GradedElement& b) { return schouten(d, a, b); };
        auto T = transfer_brackets(c, br, polyvector_degree, 2);
        auto pair = matched_pair_schouten(s);
        for (int t = 0; t < 10; ++t) {
            auto a = homogeneous_part(random_polyvector(g, s, 2)), b = homogeneous_part(random_polyvector(g, s, 2));
            if (a.is_zero() || b.is_zero()) continue;
            binary = binary && T.l2(a, b) == schouten(pair, a, b);
        }
    }
    o.require(binary, "matched-pair l2 = pair bracket");
    o.info("solvable pair and two matched pairs, N = " + std::to_string(N));
    return o;
}

Outcome determinism_criterion()
{
    Outcome o;
    cli::RunConfig cfg;
    cfg.input = std::string(LPF_SOURCE_DIR) + "/configs/moyal.json";
    cfg.command = "star-product";
    cfg.seed = kSeed;
    cfg.samples = 50000;
    auto a = cli::run(cfg), b = cli::run(cfg);
    auto ha = std::hash<std::string>{}(a.report), hb = std::hash<std::string>{}(b.report);
    o.require(a.exit_code == cli::kOk, "star-product run succeeds");
    o.require(ha == hb && a.report == b.report, "byte-identical star-product reports");
    cfg.input = std::string(LPF_SOURCE_DIR) + "/configs/sl2.json";
    cfg.command = "graph-weights";
    cfg.aerial = 2;
    cfg.terrestrial = 1;
    auto c = cli::run(cfg), d = cli::run(cfg);
    o.require(c.exit_code == cli::kOk && c.report == d.report, "byte-identical graph-weights reports");
    char buf[40];
    std::snprintf(buf, sizeof buf, "report hash %016zx", ha);
    o.info(buf);
    return o;
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds; // 0: none stated
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "contraction suite", 60, contraction_suite},
        {2, "Fedosov recursion", 60, fedosov_criterion},
        {3, "Atiyah transport", 0, atiyah_criterion},
        {4, "Todd series", 0, todd_criterion},
        {5, "complex identities", 0, complexes_criterion},
        {6, "HKR", 0, hkr_criterion},
        {7, "Kontsevich weights", 300, weights_criterion},
        {8, "star product", 0, star_criterion},
        {9, "Duflo", 60, duflo_criterion},
        {10, "transferred L-infinity", 0, linf_criterion},
        {11, "determinism", 0, determinism_criterion},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0 && sec > c.limit_seconds) o.require(false, fmt("runtime %.1f s over %.0f s", sec, c.limit_seconds));
        if (!o.pass) ++failures;
        std::printf("%s %2d %s (%.1f s%s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, sec,
                    c.limit_seconds > 0 ? fmt(", limit %.0f s", c.limit_seconds).c_str() : "", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
