#include "lpf/fedosov.hpp"

#include <bit>

namespace lpf {

namespace {

GradedElement lam(int i, int N = -1) { return GradedElement::gen({Gen::Lam, i}, N); }
GradedElement chi(int k, int N = -1) { return GradedElement::gen({Gen::Chi, k}, N); }

std::uint32_t b_mask(const LiePairSpec& s)
{
    std::uint32_t all = s.l >= 32 ? ~0u : ((1u << s.l) - 1);
    std::uint32_t a = (1u << s.rA) - 1;
    return all & ~a;
}

Derivation blank(const LiePairSpec& s, int degree)
{
    return Derivation(degree, s.l, s.r(), s.r(), s.r(), s.m);
}

int min_sdeg(const GradedElement& a)
{
    int m = -1;
    for (const auto& kv : a.terms) {
        int d = kv.first.sdeg();
        if (m < 0 || d < m) m = d;
    }
    return m;
}

} // namespace

GradedElement delta(const LiePairSpec& s, const GradedElement& a)
{
    GradedElement r(a.trunc);
    for (const auto& [w, c] : a.terms)
        for (int m = 0; m < s.r(); ++m) {
            if (!w.chi[m]) continue;
            Word rest = w;
            rest.chi[m] -= 1;
            Word l;
            l.lam = 1u << (s.rA + m);
            Word out;
            int sign = 1;
            if (!word_product(l, rest, out, sign)) continue;
            r.add_term(out, sign * c * w.chi[m]);
        }
    return r;
}

Derivation delta_derivation(const LiePairSpec& s)
{
    Derivation D = blank(s, 1);
    for (int k = 0; k < s.r(); ++k) D.chi[k] = lam(s.rA + k);
    for (int i = 0; i < s.l; ++i) D.lam[i] = GradedElement();
    for (int a = 0; a < s.m; ++a) D.x[a] = GradedElement();
    return vertical_lift(s, D);
}

GradedElement h_op(const LiePairSpec& s, const GradedElement& a)
{
    const std::uint32_t bm = b_mask(s);
    GradedElement r(a.trunc);
    for (const auto& [w, c] : a.terms) {
        int v = std::popcount(w.lam & bm);
        if (v == 0) continue;
        Rat f = c / (v + w.sdeg());
        for (int k = 0; k < s.r(); ++k) {
            int bit = s.rA + k;
            if (!(w.lam & (1u << bit))) continue;
            int below_count = std::popcount(w.lam & ((1u << bit) - 1));
            Word out = w;
            out.lam &= ~(1u << bit);
            out.chi[k] += 1;
            r.add_term(out, (below_count & 1) ? Rat(-f) : f);
        }
    }
    return r;
}

GradedElement sigma(const LiePairSpec& s, const GradedElement& a)
{
    const std::uint32_t bm = b_mask(s);
    return a.filter([&](const Word& w) { return !(w.lam & bm) && w.sdeg() == 0; });
}

GradedElement tau(const LiePairSpec& s, const GradedElement& a)
{
    if (!(sigma(s, a) == a)) throw std::invalid_argument("tau: input is not in Lambda A^vee");
    return a;
}

VField field_of(const LiePairSpec& s, const Derivation& D)
{
    VField f(s.r());
    for (int k = 0; k < s.r(); ++k)
        if (D.chi[k]) f[k] = *D.chi[k];
    return f;
}

Derivation vertical_lift(const LiePairSpec& s, Derivation D)
{
    const int r = s.r();
    for (int k = 0; k < r; ++k) {
        GradedElement e, t;
        for (int m = 0; m < r; ++m) {
            if (!D.chi[m] || !D.chi[k]) throw std::invalid_argument("vertical_lift: missing chi image");
            GradedElement dk = contract({Gen::Chi, k}, *D.chi[m]);
            if (!dk.is_zero()) e -= dk * GradedElement::gen({Gen::Eps, m});
            GradedElement dm = contract({Gen::Chi, m}, *D.chi[k]);
            if (!dm.is_zero()) t += dm * GradedElement::gen({Gen::Th, m});
        }
        D.eps[k] = e;
        D.th[k] = t;
    }
    return D;
}

Derivation as_derivation(const LiePairSpec& s, const VField& f, int degree)
{
    Derivation D = blank(s, degree);
    for (int k = 0; k < s.r(); ++k) D.chi[k] = f[k];
    for (int i = 0; i < s.l; ++i) D.lam[i] = GradedElement();
    for (int a = 0; a < s.m; ++a) D.x[a] = GradedElement();
    return vertical_lift(s, D);
}

VField h_field(const LiePairSpec& s, const VField& f)
{
    VField g(f.size());
    for (size_t k = 0; k < f.size(); ++k) g[k] = h_op(s, f[k]);
    return g;
}

VField delta_field(const LiePairSpec& s, const VField& f)
{
    VField g(f.size());
    for (size_t k = 0; k < f.size(); ++k) g[k] = delta(s, f[k]);
    return g;
}

VField sigma_field(const LiePairSpec& s, const VField& f)
{
    VField g(f.size());
    for (size_t k = 0; k < f.size(); ++k) g[k] = sigma(s, f[k]);
    return g;
}

bool is_zero(const VField& f)
{
    for (const auto& e : f)
        if (!e.is_zero()) return false;
    return true;
}

Derivation connection_derivation(const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    const int l = s.l, r = s.r();
    Derivation D = blank(s, 1);
    for (int a = 0; a < s.m; ++a) {
        GradedElement v(N);
        for (int i = 0; i < l; ++i)
            if (!s.rho(i, a).is_zero()) v += s.rho(i, a) * lam(i, N);
        D.x[a] = v;
    }
    for (int k = 0; k < l; ++k) {
        GradedElement v(N);
        for (int i = 0; i < l; ++i)
            for (int j = i + 1; j < l; ++j)
                if (!s.C(i, j, k).is_zero()) v -= s.C(i, j, k) * lam(i, N) * lam(j, N);
        D.lam[k] = v;
    }
    for (int k = 0; k < r; ++k) {
        GradedElement v(N);
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < r; ++j)
                if (!conn(i, j, k).is_zero()) v -= conn(i, j, k) * lam(i, N) * chi(j, N);
        D.chi[k] = v;
    }
    return vertical_lift(s, D);
}

VField curvature_field(const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    Derivation D = connection_derivation(s, conn, N);
    VField f(s.r());
    for (int k = 0; k < s.r(); ++k) f[k] = apply(D, *D.chi[k]);
    return f;
}

bool delta_anticommutes(const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    Derivation d = connection_derivation(s, conn, N);
    Derivation dl = delta_derivation(s);
    for (int k = 0; k < s.r(); ++k) {
        GradedElement v = delta(s, *d.chi[k]) + apply(d, *dl.chi[k]);
        if (!v.is_zero()) return false;
    }
    return true;
}

Derivation assemble_Q(const LiePairSpec& s, const Derivation& dnabla, const std::vector<VField>& X, int)
{
    Derivation Q = scaled(delta_derivation(s), -1) + dnabla;
    for (size_t k = 2; k < X.size(); ++k)
        if (!X[k].empty()) Q = Q + as_derivation(s, X[k], 1);
    return Q;
}

FedosovData fedosov_X(const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    if (N < 2) throw std::invalid_argument("fedosov_X: truncation must be at least 2");
    if (!delta_anticommutes(s, conn, N))
        throw std::domain_error("fedosov_X: delta and d^nabla do not anticommute (connection has torsion)");
    FedosovData F;
    F.spec = s;
    F.conn = conn;
    F.N = N;
    F.dnabla = connection_derivation(s, conn, N);
    const int r = s.r();
    F.X.assign(N + 1, VField());
    if (r == 0) {
        F.Q = assemble_Q(s, F.dnabla, F.X, N);
        return F;
    }
    VField R(r);
    for (int k = 0; k < r; ++k) R[k] = apply(F.dnabla, *F.dnabla.chi[k]);
    F.X[2] = h_field(s, R);
    std::vector<Derivation> D(N + 1);
    D[2] = as_derivation(s, F.X[2], 1);
    for (int k = 2; k < N; ++k) {
        VField g(r);
        for (int j = 0; j < r; ++j) {
            GradedElement v = apply(F.dnabla, F.X[k][j]) + apply(D[k], *F.dnabla.chi[j]);
            for (int p = 2; p <= k - 1; ++p) {
                int q = k + 1 - p;
                if (q < 2) continue;
                v += apply(D[p], F.X[q][j]);
            }
            g[j] = v;
        }
        F.X[k + 1] = h_field(s, g);
        D[k + 1] = as_derivation(s, F.X[k + 1], 1);
    }
    F.Q = assemble_Q(s, F.dnabla, F.X, N);
    return F;
}

GradedElement below(const GradedElement& a, int N)
{
    return a.filter([&](const Word& w) { return w.sdeg() < N; });
}

Derivation below(const Derivation& D, int N)
{
    Derivation r = D;
    for (auto* v : {&r.lam, &r.eps, &r.th, &r.chi, &r.x})
        for (auto& o : *v)
            if (o) *o = below(*o, N);
    return r;
}

Derivation square_residual(const Derivation& Q, int N)
{
    Derivation r(2 * Q.degree, Q.lam.size(), Q.eps.size(), Q.th.size(), Q.chi.size(), Q.x.size());
    auto fill = [&](const std::vector<std::optional<GradedElement>>& src, std::vector<std::optional<GradedElement>>& dst) {
        for (size_t i = 0; i < src.size(); ++i) dst[i] = below(apply(Q, *src[i]), N);
    };
    fill(Q.lam, r.lam);
    fill(Q.chi, r.chi);
    fill(Q.x, r.x);
    r.complete_with_zero();
    return r;
}

Derivation q_square_residual(const FedosovData& F)
{
    return square_residual(F.Q, F.N);
}

Contraction base_contraction(const LiePairSpec& s, int N)
{
    Contraction c;
    c.N = N;
    c.sigma = [s](const GradedElement& a) { return sigma(s, a); };
    c.tau = [s, N](const GradedElement& a) { return N >= 0 ? truncate(tau(s, a), N) : tau(s, a); };
    c.h = [s](const GradedElement& a) { return -h_op(s, a); };
    c.d_big = [s](const GradedElement& a) { return -delta(s, a); };
    c.d_small = [](const GradedElement& a) { return GradedElement(a.trunc); };
    return c;
}

Contraction perturb_contraction(const Contraction& base, const Derivation& P, int N)
{
    if (P.degree != 1) throw std::invalid_argument("perturb_contraction: perturbation must have degree +1");
    auto check = [&](const std::vector<std::optional<GradedElement>>& v, int own) {
        for (const auto& o : v) {
            if (!o) throw std::invalid_argument("perturb_contraction: perturbation has a missing image");
            int m = min_sdeg(*o);
            if (m >= 0 && m < own)
                throw std::invalid_argument("perturb_contraction: perturbation lowers the symmetric degree");
        }
    };
    check(P.lam, 0);
    check(P.eps, 0);
    check(P.th, 0);
    check(P.chi, 1);
    check(P.x, 0);
    if (is_zero(P)) return base;

    // with id - tau sigma = dh + hd the series runs in powers of (-h P)
    auto series = [base, P, N](GradedElement t) {
        GradedElement acc = t;
        for (int n = 0; n <= N + 1 && !t.is_zero(); ++n) {
            t = -base.h(apply(P, t));
            acc += t;
        }
        return acc;
    };
    Contraction c;
    c.N = N;
    c.sigma = base.sigma;
    c.tau = [base, series, N](const GradedElement& a) { return series(truncate(base.tau(a), N)); };
    c.h = [base, series, N](const GradedElement& a) { return series(base.h(truncate(a, N))); };
    c.d_big = [base, P](const GradedElement& a) { return base.d_big(a) + apply(P, a); };
    c.d_small = [base, P, series, N](const GradedElement& a) {
        return base.d_small(a) + base.sigma(apply(P, series(truncate(base.tau(a), N))));
    };
    return c;
}

Contraction fedosov_contraction(const FedosovData& F)
{
    Derivation P = F.Q + delta_derivation(F.spec);
    return perturb_contraction(base_contraction(F.spec, F.N), P, F.N);
}

int polyvector_degree(const Word& w)
{
    return std::popcount(w.lam) + std::popcount(w.eps) - 1;
}

int element_degree(const GradedElement& a, const DegreeFn& degree)
{
    std::optional<int> d;
    for (const auto& kv : a.terms) {
        int k = degree(kv.first);
        if (d && *d != k) throw std::invalid_argument("element_degree: inhomogeneous element");
        d = k;
    }
    return d.value_or(0);
}

TransferredBrackets transfer_brackets(const Contraction& c, const Bracket& bracket, const DegreeFn& degree,
                                      int max_arity)
{
    if (max_arity > 3) throw std::invalid_argument("transfer_brackets: arity above 3 is not supported");
    TransferredBrackets t;
    t.l1 = c.d_small;
    t.l2 = [c, bracket](const GradedElement& a, const GradedElement& b) {
        return c.sigma(bracket(c.tau(a), c.tau(b)));
    };
    if (max_arity < 3) {
        t.l3 = [](const GradedElement&, const GradedElement&, const GradedElement&) { return GradedElement(); };
        return t;
    }
    t.l3 = [c, bracket, degree](const GradedElement& a, const GradedElement& b, const GradedElement& e) {
        int da = element_degree(a, degree), db = element_degree(b, degree), de = element_degree(e, degree);
        GradedElement ta = c.tau(a), tb = c.tau(b), te = c.tau(e);
        GradedElement v = bracket(c.h(bracket(ta, tb)), te);
        GradedElement w = bracket(c.h(bracket(ta, te)), tb);
        GradedElement u = bracket(c.h(bracket(tb, te)), ta);
        if ((db * de) & 1) v += w;
        else v -= w;
        if ((da * (db + de)) & 1) v -= u;
        else v += u;
        return c.sigma(v);
    };
    return t;
}

} // namespace lpf
