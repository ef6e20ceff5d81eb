#include "lpf/liepair.hpp"
#include "lpf/linalg.hpp"

#include <map>

namespace lpf {

LiePairSpec::LiePairSpec(int l_, int rA_, int m_)
    : base(m_ > 0 ? BaseKind::PolyChart : BaseKind::Point), m(m_), l(l_), rA(rA_),
      c(static_cast<size_t>(l_) * l_ * l_), anchor(static_cast<size_t>(l_) * m_)
{
    if (l_ < 0 || rA_ < 0 || rA_ > l_) throw std::invalid_argument("ranks: need 0 <= rA <= l");
    if (l_ > kMaxOdd || l_ - rA_ > kMaxEven || m_ > kMaxEven) throw std::invalid_argument("ranks exceed supported size");
    for (int i = 0; i < l_; ++i) names.push_back("v" + std::to_string(i + 1));
}

Poly LiePairSpec::anchor_apply(int i, const Poly& f) const
{
    Poly r;
    for (int a = 0; a < m; ++a)
        if (!rho(i, a).is_zero()) r += rho(i, a) * contract({Gen::X, a}, f);
    return r;
}

void LiePairSpec::set_bracket(int i, int j, int k, const Poly& v)
{
    C(i, j, k) = v;
    C(j, i, k) = -v;
}

ValidationReport validate(const LiePairSpec& s)
{
    ValidationReport rep;
    auto fail = [&](std::string what, std::vector<int> w) {
        rep.ok = false;
        rep.violations.push_back({std::move(what), std::move(w)});
    };
    const int l = s.l, rA = s.rA;
    if (s.base == BaseKind::Point) {
        auto constant = [&]() {
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < l; ++j)
                    for (int k = 0; k < l; ++k)
                        for (const auto& kv : s.C(i, j, k).terms)
                            if (kv.first != Word{}) return std::vector<int>{i, j, k};
            return std::vector<int>{};
        }();
        if (!constant.empty()) fail("point base needs constant structure constants", constant);
    }
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < l; ++k)
                if (!(s.C(i, j, k) + s.C(j, i, k)).is_zero()) fail("skew-symmetry", {i, j, k});

    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < l; ++k)
                for (int q = 0; q < l; ++q) {
                    Poly sum;
                    const int tri[3][3] = {{i, j, k}, {j, k, i}, {k, i, j}};
                    for (const auto& t : tri) {
                        for (int p = 0; p < l; ++p) sum += s.C(t[0], t[1], p) * s.C(p, t[2], q);
                        sum -= s.anchor_apply(t[2], s.C(t[0], t[1], q));
                    }
                    if (!sum.is_zero()) fail("Jacobi identity", {i, j, k, q});
                }

    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int a = 0; a < s.m; ++a) {
                Poly lhs;
                for (int p = 0; p < l; ++p) lhs += s.C(i, j, p) * s.rho(p, a);
                Poly rhs = s.anchor_apply(i, s.rho(j, a)) - s.anchor_apply(j, s.rho(i, a));
                if (!(lhs - rhs).is_zero()) fail("anchor is a bracket morphism", {i, j, a});
            }

    for (int a = 0; a < rA; ++a)
        for (int b = 0; b < rA; ++b)
            for (int k = rA; k < l; ++k)
                if (!s.C(a, b, k).is_zero()) fail("A closed under bracket", {a, b, k});
    return rep;
}

ConnectionSpec bott_connection(const LiePairSpec& s)
{
    ConnectionSpec g(s.l, s.r());
    for (int a = 0; a < s.rA; ++a)
        for (int m = 0; m < s.r(); ++m)
            for (int k = 0; k < s.r(); ++k) g(a, m, k) = s.C(a, s.rA + m, s.rA + k);
    return g;
}

bool extends_bott(const LiePairSpec& s, const ConnectionSpec& conn)
{
    for (int a = 0; a < s.rA; ++a)
        for (int m = 0; m < s.r(); ++m)
            for (int k = 0; k < s.r(); ++k)
                if (!(conn(a, m, k) - s.C(a, s.rA + m, s.rA + k)).is_zero()) return false;
    return true;
}

bool TorsionData::zero() const
{
    for (const auto& t : T)
        if (!t.is_zero()) return false;
    return true;
}

TorsionData torsion(const LiePairSpec& s, const ConnectionSpec& conn)
{
    const int l = s.l, rA = s.rA, r = s.r();
    TorsionData td;
    td.T.resize(static_cast<size_t>(l) * l * r);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < r; ++k) {
                Poly t;
                if (j >= rA) t += conn(i, j - rA, k);
                if (i >= rA) t -= conn(j, i - rA, k);
                t -= s.C(i, j, rA + k);
                td.T[(i * l + j) * r + k] = t;
            }
    td.has_beta = true;
    for (int a = 0; a < rA && td.has_beta; ++a)
        for (int j = 0; j < l && td.has_beta; ++j)
            for (int k = 0; k < r; ++k)
                if (!td.T[(a * l + j) * r + k].is_zero()) {
                    td.has_beta = false;
                    break;
                }
    if (td.has_beta) {
        td.beta.resize(static_cast<size_t>(r) * r * r);
        for (int m = 0; m < r; ++m)
            for (int n = 0; n < r; ++n)
                for (int k = 0; k < r; ++k) td.beta[(m * r + n) * r + k] = td.T[((rA + m) * l + rA + n) * r + k];
    }
    return td;
}

ConnectionSpec make_torsion_free(const LiePairSpec& s, const ConnectionSpec& conn)
{
    if (!extends_bott(s, conn)) throw std::domain_error("make_torsion_free: connection does not extend the Bott connection");
    auto td = torsion(s, conn);
    const int r = s.r();
    ConnectionSpec out = conn;
    for (int n = 0; n < r; ++n)
        for (int m = 0; m < r; ++m)
            for (int k = 0; k < r; ++k) out(s.rA + n, m, k) -= rat(1, 2) * td.beta[(n * r + m) * r + k];
    if (!torsion(s, out).zero()) throw std::logic_error("make_torsion_free: residual torsion");
    return out;
}

CurvatureData curvature(const LiePairSpec& s, const ConnectionSpec& G)
{
    const int l = s.l, rA = s.rA, r = s.r();
    CurvatureData cd;
    cd.l = l;
    cd.rA = rA;
    cd.r = r;
    cd.R.resize(static_cast<size_t>(l) * l * r * r);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int m = 0; m < r; ++m)
                for (int k = 0; k < r; ++k) {
                    Poly v = s.anchor_apply(i, G(j, m, k)) - s.anchor_apply(j, G(i, m, k));
                    for (int n = 0; n < r; ++n) v += G(j, m, n) * G(i, n, k) - G(i, m, n) * G(j, n, k);
                    for (int p = 0; p < l; ++p) v -= s.C(i, j, p) * G(p, m, k);
                    cd.R[((i * l + j) * r + m) * r + k] = v;
                }
    cd.R11.resize(static_cast<size_t>(rA) * r * r * r);
    for (int a = 0; a < rA; ++a)
        for (int n = 0; n < r; ++n)
            for (int m = 0; m < r; ++m)
                for (int k = 0; k < r; ++k) cd.R11[((a * r + n) * r + m) * r + k] = cd.full(a, rA + n, m, k);
    cd.R02.resize(static_cast<size_t>(r) * r * r * r);
    for (int n = 0; n < r; ++n)
        for (int p = 0; p < r; ++p)
            for (int m = 0; m < r; ++m)
                for (int k = 0; k < r; ++k) cd.R02[((n * r + p) * r + m) * r + k] = cd.full(rA + n, rA + p, m, k);
    cd.T = torsion(s, G);
    return cd;
}

ModuleAction bott_module(const LiePairSpec& s, int ncov, int ncontra)
{
    const int r = s.r(), rA = s.rA;
    int nf = ncov + ncontra;
    int dim = 1;
    for (int i = 0; i < nf; ++i) dim *= r;
    ModuleAction M;
    M.nframe = rA;
    M.dim = dim;
    M.act.assign(rA, std::vector<Poly>(static_cast<size_t>(dim) * dim));
    std::vector<int> idx(nf);
    for (int a = 0; a < rA; ++a) {
        for (int e = 0; e < dim; ++e) {
            int t = e;
            for (int f = nf - 1; f >= 0; --f) {
                idx[f] = t % r;
                t /= r;
            }
            for (int slot = 0; slot < nf; ++slot) {
                for (int nv = 0; nv < r; ++nv) {
                    Poly coef = slot < ncov ? -s.C(a, s.rA + nv, s.rA + idx[slot]) : s.C(a, s.rA + idx[slot], s.rA + nv);
                    if (coef.is_zero()) continue;
                    auto j = idx;
                    j[slot] = nv;
                    int f = 0;
                    for (int q = 0; q < nf; ++q) f = f * r + j[q];
                    M.act[a][f * dim + e] += coef;
                }
            }
        }
    }
    return M;
}

bool is_flat(const LiePairSpec& s, const ModuleAction& M)
{
    const int n = M.nframe, d = M.dim;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int p = n; p < s.l; ++p)
                if (!s.C(i, j, p).is_zero()) return false;
            for (int f = 0; f < d; ++f)
                for (int e = 0; e < d; ++e) {
                    Poly v = s.anchor_apply(i, M.act[j][f * d + e]) - s.anchor_apply(j, M.act[i][f * d + e]);
                    for (int g = 0; g < d; ++g)
                        v += M.act[i][f * d + g] * M.act[j][g * d + e] - M.act[j][f * d + g] * M.act[i][g * d + e];
                    for (int p = 0; p < n; ++p) v -= s.C(i, j, p) * M.act[p][f * d + e];
                    if (!v.is_zero()) return false;
                }
        }
    return true;
}

Derivation ce_derivation(const LiePairSpec& s, int nframe)
{
    const int r = s.r();
    Derivation D(1, s.l, r, r, r, s.m);
    for (int a = 0; a < s.m; ++a) {
        GradedElement v;
        for (int i = 0; i < nframe; ++i) v += s.rho(i, a) * GradedElement::gen({Gen::Lam, i});
        D.x[a] = v;
    }
    for (int k = 0; k < s.l; ++k) {
        GradedElement v;
        if (k < nframe)
            for (int i = 0; i < nframe; ++i)
                for (int j = 0; j < nframe; ++j)
                    if (!s.C(i, j, k).is_zero())
                        v += rat(-1, 2) * s.C(i, j, k) * GradedElement::gen({Gen::Lam, i}) * GradedElement::gen({Gen::Lam, j});
        D.lam[k] = v;
    }
    D.complete_with_zero();
    return D;
}

Cochain ce_differential(const LiePairSpec& s, const ModuleAction& M, const Cochain& w)
{
    if (static_cast<int>(w.size()) != M.dim) throw std::invalid_argument("ce_differential: cochain rank mismatch");
    if (!is_flat(s, M)) throw std::domain_error("ce_differential: module action is not flat");
    Derivation D = ce_derivation(s, M.nframe);
    Cochain out(M.dim);
    for (int f = 0; f < M.dim; ++f) out[f] = apply(D, w[f]);
    for (int i = 0; i < M.nframe; ++i) {
        GradedElement li = GradedElement::gen({Gen::Lam, i});
        for (int f = 0; f < M.dim; ++f)
            for (int e = 0; e < M.dim; ++e) {
                const Poly& a = M.act[i][f * M.dim + e];
                if (a.is_zero() || w[e].is_zero()) continue;
                out[f] += a * (li * w[e]);
            }
    }
    return out;
}

Cochain atiyah_cochain(const LiePairSpec& s, const CurvatureData& R)
{
    const int r = s.r();
    Cochain w(static_cast<size_t>(r) * r * r);
    for (int n = 0; n < r; ++n)
        for (int m = 0; m < r; ++m)
            for (int k = 0; k < r; ++k) {
                GradedElement v;
                for (int a = 0; a < s.rA; ++a) v += R.r11(a, n, m, k) * GradedElement::gen({Gen::Lam, a});
                w[(n * r + m) * r + k] = v;
            }
    return w;
}

namespace {

void monomials_upto(int m, int maxdeg, Exps cur, int var, std::vector<Exps>& out)
{
    if (var == m) {
        out.push_back(cur);
        return;
    }
    for (int d = 0; MultiIndex::norm(cur) + d <= maxdeg; ++d) {
        Exps e = cur;
        e[var] = static_cast<std::uint8_t>(d);
        monomials_upto(m, maxdeg, e, var + 1, out);
    }
}

} // namespace

bool is_coboundary(const LiePairSpec& s, const ModuleAction& M, const Cochain& w, int maxdeg)
{
    std::vector<Exps> mons;
    monomials_upto(s.m, maxdeg, Exps{}, 0, mons);
    std::vector<Cochain> cols;
    for (int e = 0; e < M.dim; ++e)
        for (const auto& mu : mons) {
            Cochain phi(M.dim);
            Word wd;
            wd.x = mu;
            phi[e] = GradedElement::monomial(wd, 1);
            cols.push_back(ce_differential(s, M, phi));
        }
    std::map<std::pair<int, Word>, int> rows;
    auto row_of = [&](int f, const Word& wd) {
        auto it = rows.try_emplace({f, wd}, static_cast<int>(rows.size())).first;
        return it->second;
    };
    for (const auto& c : cols)
        for (int f = 0; f < M.dim; ++f)
            for (const auto& kv : c[f].terms) row_of(f, kv.first);
    for (int f = 0; f < M.dim; ++f)
        for (const auto& kv : w[f].terms) row_of(f, kv.first);
    Matrix A(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    std::vector<Rat> b(rows.size());
    for (size_t j = 0; j < cols.size(); ++j)
        for (int f = 0; f < M.dim; ++f)
            for (const auto& kv : cols[j][f].terms) A(rows.at({f, kv.first}), static_cast<int>(j)) = kv.second;
    for (int f = 0; f < M.dim; ++f)
        for (const auto& kv : w[f].terms) b[rows.at({f, kv.first})] = kv.second;
    return solve(A, b).has_value();
}

} // namespace lpf
