#include "lpf/poly_complexes.hpp"

#include "lpf/linalg.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lpf {

namespace {

int sgn(int parity) { return parity % 2 ? -1 : 1; }

int min_trunc(int a, int b)
{
    if (a < 0) return b;
    if (b < 0) return a;
    return std::min(a, b);
}

Rat constant_of(const Poly& p, const char* who)
{
    if (p.is_zero()) return 0;
    if (p.terms.size() != 1 || p.terms.begin()->first != Word{})
        throw std::domain_error(std::string(who) + ": needs constant structure constants (Lie algebra pair)");
    return p.terms.begin()->second;
}

// all K <= J componentwise with prod binom(J_i, K_i)
void for_each_sub(const Exps& J, const std::function<void(const Exps&, const Rat&)>& fn)
{
    Exps K{};
    std::function<void(int, Rat)> rec = [&](int i, Rat c) {
        if (i == kMaxEven) {
            fn(K, c);
            return;
        }
        for (int k = 0; k <= J[i]; ++k) {
            K[i] = static_cast<std::uint8_t>(k);
            rec(i + 1, c * binomial(J[i], k));
        }
        K[i] = 0;
    };
    rec(0, Rat(1));
}

Exps minus(const Exps& a, const Exps& b)
{
    Exps c{};
    for (int i = 0; i < kMaxEven; ++i) c[i] = static_cast<std::uint8_t>(a[i] - b[i]);
    return c;
}

Exps plus(const Exps& a, const Exps& b)
{
    Exps c{};
    for (int i = 0; i < kMaxEven; ++i) c[i] = static_cast<std::uint8_t>(a[i] + b[i]);
    return c;
}

std::vector<int> bits_of(std::uint32_t m)
{
    std::vector<int> v;
    for (int i = 0; i < 32; ++i)
        if (m >> i & 1u) v.push_back(i);
    return v;
}

int permutation_sign(const std::vector<int>& p)
{
    int inv = 0;
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) ++inv;
    return sgn(inv);
}

// derivation [g, .] for a function generator g: eps_j -> -[eps_j, g]
Derivation function_ad(const SchoutenData& d, GenId g)
{
    int deg = g.odd() ? 0 : -1;
    Derivation D(deg, d.nlam, d.neps, 0, d.nchi, d.nx);
    D.complete_with_zero();
    GradedElement gg = GradedElement::gen(g);
    for (int j = 0; j < d.neps; ++j) D.eps[j] = -apply(d.ad_eps[j], gg);
    return D;
}

} // namespace

// ---------------------------------------------------------------------------

SchoutenData vertical_schouten(int nlam, int r, int nx)
{
    SchoutenData d{nlam, r, r, nx, {}};
    for (int k = 0; k < r; ++k) {
        Derivation D(0, nlam, r, 0, r, nx);
        D.complete_with_zero();
        D.chi[k] = GradedElement::one();
        d.ad_eps.push_back(D);
    }
    return d;
}

SchoutenData matched_pair_schouten(const LiePairSpec& s)
{
    const int rA = s.rA, r = s.r();
    for (int m = 0; m < r; ++m)
        for (int n = 0; n < r; ++n)
            for (int a = 0; a < rA; ++a)
                if (!s.C(rA + m, rA + n, a).is_zero())
                    throw std::domain_error("schouten: B is not closed under the bracket, so the pair-side "
                                            "bracket is only defined for matched pairs");
    SchoutenData d{rA, r, 0, s.m, {}};
    for (int m = 0; m < r; ++m) {
        Derivation D(0, rA, r, 0, 0, s.m);
        D.complete_with_zero();
        for (int a = 0; a < rA; ++a) {
            GradedElement v;
            for (int j = 0; j < rA; ++j) v -= s.C(rA + m, j, a) * GradedElement::gen({Gen::Lam, j});
            D.lam[a] = v;
        }
        for (int n = 0; n < r; ++n) {
            GradedElement v;
            for (int k = 0; k < r; ++k) v += s.C(rA + m, rA + n, rA + k) * GradedElement::gen({Gen::Eps, k});
            D.eps[n] = v;
        }
        for (int a = 0; a < s.m; ++a) D.x[a] = s.rho(rA + m, a);
        d.ad_eps.push_back(D);
    }
    return d;
}

GradedElement schouten(const SchoutenData& d, const GradedElement& a, const GradedElement& b)
{
    // [P, Q] = sum_g (-1)^{|g|(|P|-1)} (dP/dg) [g, Q] for P a single word
    GradedElement out(min_trunc(a.trunc, b.trunc));
    for (const auto& [w, c] : a.terms) {
        if (w.th) throw std::invalid_argument("schouten: fibre forms are not polyvectors");
        GradedElement P = GradedElement::monomial(w, c, a.trunc);
        int par = w.degree() - 1;
        for (int i : bits_of(w.lam))
            out += sgn(par) * (contract({Gen::Lam, i}, P) * apply(function_ad(d, {Gen::Lam, i}), b));
        for (int i : bits_of(w.eps)) out += sgn(par) * (contract({Gen::Eps, i}, P) * apply(d.ad_eps.at(i), b));
        for (int k = 0; k < kMaxEven; ++k) {
            if (w.chi[k]) out += contract({Gen::Chi, k}, P) * apply(function_ad(d, {Gen::Chi, k}), b);
            if (w.x[k]) out += contract({Gen::X, k}, P) * apply(function_ad(d, {Gen::X, k}), b);
        }
    }
    return out;
}

Derivation ce_T_derivation(const LiePairSpec& s)
{
    const int rA = s.rA, r = s.r();
    Derivation D = ce_derivation(s, rA);
    for (int m = 0; m < r; ++m) {
        GradedElement v;
        for (int a = 0; a < rA; ++a)
            for (int n = 0; n < r; ++n)
                if (!s.C(a, rA + m, rA + n).is_zero())
                    v += s.C(a, rA + m, rA + n) * GradedElement::gen({Gen::Lam, a}) * GradedElement::gen({Gen::Eps, n});
        D.eps[m] = v;
    }
    return D;
}

GradedElement ce_d_T(const LiePairSpec& s, const GradedElement& x) { return apply(ce_T_derivation(s), x); }

// ---------------------------------------------------------------------------

PairPbw::PairPbw(const LiePairSpec& s) : s_(s)
{
    if (s.base != BaseKind::Point) throw std::domain_error("PairPbw: D_poly is built for Lie algebra pairs only");
    const int l = s.l;
    std::vector<Rat> c(static_cast<size_t>(l) * l * l);
    auto frame = [&](int p) { return p < s.r() ? s.rA + p : p - s.r(); };
    for (int p = 0; p < l; ++p)
        for (int q = 0; q < l; ++q)
            for (int t = 0; t < l; ++t) c[(p * l + q) * l + t] = constant_of(s.C(frame(p), frame(q), frame(t)), "PairPbw");
    u_ = Uea(l, std::move(c));
}

int PairPbw::pos(int frame) const { return frame >= s_.rA ? frame - s_.rA : s_.r() + frame; }

Uea::Elem PairPbw::lift(const Exps& J) const
{
    Uea::Mono m;
    for (int k = 0; k < r(); ++k)
        for (int e = 0; e < J[k]; ++e) m.push_back(k);
    return {{m, Rat(1)}};
}

D0 PairPbw::reduce(const Uea::Elem& e) const
{
    // A sits last in the PBW order, so a monomial with an A letter lies in U(g)h
    D0 out;
    for (const auto& [m, c] : e) {
        if (!m.empty() && m.back() >= r()) continue;
        Exps J{};
        for (int p : m) J[p]++;
        out[J] += c;
        if (out[J] == 0) out.erase(J);
    }
    return out;
}

D0 PairPbw::left_multiply(int frame, const D0& u) const
{
    Uea::Elem acc;
    for (const auto& [J, c] : u) add_to(acc, u_.multiply(Uea::basis(pos(frame)), lift(J)), c);
    return reduce(acc);
}

D0 PairPbw::act(int a, const D0& u) const
{
    if (a < 0 || a >= s_.rA) throw std::out_of_range("PairPbw::act: not an A-frame index");
    return left_multiply(a, u);
}

std::map<std::pair<Exps, Exps>, Rat> comultiply(const D0& u)
{
    std::map<std::pair<Exps, Exps>, Rat> out;
    for (const auto& [J, c] : u)
        for_each_sub(J, [&](const Exps& K, const Rat& b) {
            auto& slot = out[{K, minus(J, K)}];
            slot += c * b;
        });
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

int DKey::p() const { return std::popcount(lam); }

int DKey::pbw_degree() const
{
    int d = 0;
    for (const auto& e : u) d += MultiIndex::norm(e);
    return d;
}

void PolyDiffOp::add(const DKey& k, const Rat& c)
{
    if (c == 0) return;
    auto& slot = terms[k];
    slot += c;
    if (slot == 0) terms.erase(k);
}

PolyDiffOp& PolyDiffOp::operator+=(const PolyDiffOp& o)
{
    for (const auto& [k, c] : o.terms) add(k, c);
    return *this;
}

PolyDiffOp& PolyDiffOp::operator-=(const PolyDiffOp& o)
{
    for (const auto& [k, c] : o.terms) add(k, -c);
    return *this;
}

PolyDiffOp& PolyDiffOp::operator*=(const Rat& c)
{
    if (c == 0) terms.clear();
    for (auto& kv : terms) kv.second *= c;
    return *this;
}

PolyDiffOp operator+(PolyDiffOp a, const PolyDiffOp& b) { return a += b; }
PolyDiffOp operator-(PolyDiffOp a, const PolyDiffOp& b) { return a -= b; }
PolyDiffOp operator*(const Rat& c, PolyDiffOp a) { return a *= c; }

std::string PolyDiffOp::str(const LiePairSpec& s) const
{
    auto name = [&](int frame) { return frame < static_cast<int>(s.names.size()) ? s.names[frame] : "e" + std::to_string(frame); };
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << to_pq(c);
        for (int a : bits_of(k.lam)) os << " " << name(a) << "*";
        if (k.u.empty()) continue;
        os << " ";
        for (size_t i = 0; i < k.u.size(); ++i) {
            if (i) os << "(x)";
            bool any = false;
            for (int m = 0; m < s.r(); ++m)
                for (int e = 0; e < k.u[i][m]; ++e) {
                    os << (any ? "." : "") << name(s.rA + m);
                    any = true;
                }
            if (!any) os << "1";
        }
    }
    return first ? "0" : os.str();
}

PolyDiffOp hochschild_d(const PolyDiffOp& x)
{
    PolyDiffOp out;
    for (const auto& [key, c] : x.terms) {
        const int k = static_cast<int>(key.u.size());
        DKey front = key;
        front.u.insert(front.u.begin(), Exps{});
        out.add(front, c);
        DKey back = key;
        back.u.push_back(Exps{});
        out.add(back, sgn(k + 1) * c);
        for (int i = 0; i < k; ++i)
            for (const auto& [lr, b] : comultiply(D0{{key.u[i], Rat(1)}})) {
                DKey t{key.lam, {}};
                t.u.assign(key.u.begin(), key.u.begin() + i);
                t.u.push_back(lr.first);
                t.u.push_back(lr.second);
                t.u.insert(t.u.end(), key.u.begin() + i + 1, key.u.end());
                out.add(t, sgn(i + 1) * c * b);
            }
    }
    return out;
}

PolyDiffOp ce_d_D(const PairPbw& P, const PolyDiffOp& x)
{
    const LiePairSpec& s = P.spec();
    Derivation ce = ce_derivation(s, s.rA);
    PolyDiffOp out;
    for (const auto& [key, c] : x.terms) {
        Word w;
        w.lam = key.lam;
        for (const auto& [v, b] : apply(ce, GradedElement::monomial(w, c)).terms) out.add({v.lam, key.u}, b);
        for (int a = 0; a < s.rA; ++a) {
            Word la, prod;
            la.lam = 1u << a;
            int sign = 1;
            if (!word_product(la, w, prod, sign)) continue;
            for (size_t k = 0; k < key.u.size(); ++k)
                for (const auto& [J, b] : P.act(a, D0{{key.u[k], Rat(1)}})) {
                    DKey t{prod.lam, key.u};
                    t.u[k] = J;
                    out.add(t, sign * c * b);
                }
        }
    }
    return out;
}

PolyDiffOp total_d_D(const PairPbw& P, const PolyDiffOp& x)
{
    PolyDiffOp out = ce_d_D(P, x);
    for (const auto& [key, c] : x.terms) {
        PolyDiffOp single;
        single.add(key, sgn(key.p()) * c);
        out += hochschild_d(single);
    }
    return out;
}

PolyDiffOp hkr(const LiePairSpec& s, const GradedElement& x)
{
    PolyDiffOp out;
    for (const auto& [w, c] : x.terms) {
        if (w.th || w.sdeg() || MultiIndex::norm(w.x) || (w.lam >> s.rA))
            throw std::invalid_argument("hkr: input must lie in Lambda A^vee (x) Lambda B");
        std::vector<int> e = bits_of(w.eps);
        std::vector<int> perm(e.size());
        std::iota(perm.begin(), perm.end(), 0);
        Rat scale = c / factorial(static_cast<int>(e.size()));
        do {
            DKey k{w.lam, {}};
            for (int p : perm) k.u.push_back(MultiIndex::unit(e[p]));
            out.add(k, permutation_sign(perm) * scale);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class Key>
struct Cell {
    std::vector<Key> basis;
    std::map<Key, int> index;
    void push(const Key& k)
    {
        index[k] = static_cast<int>(basis.size());
        basis.push_back(k);
    }
};

template <class Key>
std::vector<Rat> coordinates(const Cell<Key>& cell, const std::map<Key, Rat>& v)
{
    std::vector<Rat> x(cell.basis.size());
    for (const auto& [k, c] : v) {
        auto it = cell.index.find(k);
        if (it == cell.index.end()) throw std::logic_error("cohomology: differential leaves the filtered piece");
        x[it->second] = c;
    }
    return x;
}

Matrix rows_to_matrix(const std::vector<std::vector<Rat>>& rows, int cols)
{
    Matrix M(static_cast<int>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols; ++j) M(static_cast<int>(i), j) = rows[i][j];
    return M;
}

std::vector<std::uint32_t> masks_with(int n, int p)
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t m = 0; m < (1u << n); ++m)
        if (std::popcount(m) == p) out.push_back(m);
    return out;
}

Cell<Word> t_cell(const LiePairSpec& s, int n, int cutoff)
{
    Cell<Word> c;
    for (int p = 0; p <= s.rA; ++p) {
        int e = n - p + 1;
        if (e < 0 || e > s.r() || e > cutoff) continue;
        for (auto lm : masks_with(s.rA, p))
            for (auto em : masks_with(s.r(), e)) {
                Word w;
                w.lam = lm;
                w.eps = em;
                c.push(w);
            }
    }
    return c;
}

void exps_of_norm(int r, int norm, std::vector<Exps>& out)
{
    Exps e{};
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == r - 1) {
            e[i] = static_cast<std::uint8_t>(left);
            out.push_back(e);
            return;
        }
        for (int k = left; k >= 0; --k) {
            e[i] = static_cast<std::uint8_t>(k);
            rec(i + 1, left - k);
        }
    };
    if (r > 0) rec(0, norm);
}

Cell<DKey> d_cell(const LiePairSpec& s, int n, int cutoff)
{
    Cell<DKey> c;
    std::vector<std::vector<Exps>> by_norm(cutoff + 1);
    for (int d = 1; d <= cutoff; ++d) exps_of_norm(s.r(), d, by_norm[d]);
    for (int p = 0; p <= s.rA; ++p) {
        int k = n - p + 1;
        if (k < 0) continue;
        for (auto lm : masks_with(s.rA, p)) {
            std::vector<Exps> cur;
            std::function<void(int)> rec = [&](int budget) {
                if (static_cast<int>(cur.size()) == k) {
                    c.push(DKey{lm, cur});
                    return;
                }
                int still = k - static_cast<int>(cur.size()) - 1;
                for (int d = 1; d <= budget - still; ++d)
                    for (const auto& e : by_norm[d]) {
                        cur.push_back(e);
                        rec(budget - d);
                        cur.pop_back();
                    }
            };
            rec(cutoff);
        }
    }
    return c;
}

std::map<Word, Rat> as_map(const GradedElement& e) { return {e.terms.begin(), e.terms.end()}; }

// columns of the differential C^n -> C^{n+1}, as coordinate vectors
template <class Key, class Apply>
std::vector<std::vector<Rat>> images(const Cell<Key>& from, const Cell<Key>& to, Apply&& d)
{
    std::vector<std::vector<Rat>> out;
    for (const auto& k : from.basis) out.push_back(coordinates(to, d(k)));
    return out;
}

int rank_of(const std::vector<std::vector<Rat>>& vecs, int dim)
{
    if (vecs.empty() || dim == 0) return 0;
    return rank(rows_to_matrix(vecs, dim));
}

struct Computed {
    std::vector<int> dims, ranks;
    std::vector<std::vector<std::vector<Rat>>> reps;   // coordinates per degree
    std::vector<std::vector<std::vector<Rat>>> bounds; // image of d^{n-1} in C^n
};

template <class Key, class Apply>
Computed compute(const std::vector<Cell<Key>>& cells, int lo, Apply&& d)
{
    // cells cover degrees lo-1 .. hi+1
    Computed out;
    const int count = static_cast<int>(cells.size()) - 2;
    for (int i = 0; i < count; ++i) {
        const auto& prev = cells[i];
        const auto& cur = cells[i + 1];
        const auto& next = cells[i + 2];
        const int dim = static_cast<int>(cur.basis.size());
        auto im = images(prev, cur, d);
        auto cols = images(cur, next, d);
        Matrix D(static_cast<int>(next.basis.size()), dim);
        for (int j = 0; j < dim; ++j)
            for (size_t r = 0; r < next.basis.size(); ++r) D(static_cast<int>(r), j) = cols[j][r];
        auto ker = kernel(D);
        int rim = rank_of(im, dim);
        std::vector<std::vector<Rat>> span = im, reps;
        int have = rim;
        for (const auto& z : ker) {
            span.push_back(z);
            int now = rank_of(span, dim);
            if (now > have) {
                have = now;
                reps.push_back(z);
            } else {
                span.pop_back();
            }
        }
        out.dims.push_back(dim);
        out.ranks.push_back(static_cast<int>(reps.size()));
        out.reps.push_back(reps);
        out.bounds.push_back(im);
        (void)lo;
    }
    return out;
}

void check_window(const LiePairSpec& s, int lo, int hi, int cutoff)
{
    if (s.base != BaseKind::Point) throw std::domain_error("cohomology: needs a Lie algebra pair");
    if (lo < -1 || hi < lo) throw std::invalid_argument("cohomology: degree window must satisfy -1 <= lo <= hi");
    if (hi + 1 > cutoff) throw std::invalid_argument("cohomology: window too large for the filtration cutoff");
}

struct Both {
    std::vector<Cell<Word>> tc;
    std::vector<Cell<DKey>> dc;
};

} // namespace

CohomologyResult cohomology(const LiePairSpec& s, Side side, int lo, int hi, int cutoff)
{
    check_window(s, lo, hi, cutoff);
    CohomologyResult res;
    res.side = side;
    res.lo = lo;
    res.hi = hi;
    res.cutoff = cutoff;
    if (side == Side::T) {
        std::vector<Cell<Word>> cells;
        for (int n = lo - 1; n <= hi + 1; ++n) cells.push_back(t_cell(s, n, cutoff));
        Derivation D = ce_T_derivation(s);
        auto c = compute(cells, lo, [&](const Word& w) { return as_map(apply(D, GradedElement::monomial(w, 1))); });
        res.cochain_dims = c.dims;
        res.ranks = c.ranks;
        for (size_t i = 0; i < c.reps.size(); ++i) {
            std::vector<GradedElement> v;
            for (const auto& z : c.reps[i]) {
                GradedElement e;
                for (size_t j = 0; j < z.size(); ++j) e.add_term(cells[i + 1].basis[j], z[j]);
                v.push_back(e);
            }
            res.t_reps.push_back(v);
        }
    } else {
        PairPbw P(s);
        std::vector<Cell<DKey>> cells;
        for (int n = lo - 1; n <= hi + 1; ++n) cells.push_back(d_cell(s, n, cutoff));
        auto c = compute(cells, lo, [&](const DKey& k) {
            PolyDiffOp x;
            x.add(k, 1);
            return total_d_D(P, x).terms;
        });
        res.cochain_dims = c.dims;
        res.ranks = c.ranks;
        for (size_t i = 0; i < c.reps.size(); ++i) {
            std::vector<PolyDiffOp> v;
            for (const auto& z : c.reps[i]) {
                PolyDiffOp e;
                for (size_t j = 0; j < z.size(); ++j) e.add(cells[i + 1].basis[j], z[j]);
                v.push_back(e);
            }
            res.d_reps.push_back(v);
        }
    }
    return res;
}

bool HkrComparison::rank_preserving() const { return rank_T == rank_D && rank_T == rank_map; }

HkrComparison hkr_comparison(const LiePairSpec& s, int lo, int hi, int cutoff)
{
    check_window(s, lo, hi, cutoff);
    HkrComparison out;
    out.lo = lo;
    out.hi = hi;
    out.cutoff = cutoff;
    auto T = cohomology(s, Side::T, lo, hi, cutoff);
    PairPbw P(s);
    std::vector<Cell<DKey>> cells;
    for (int n = lo - 1; n <= hi + 1; ++n) cells.push_back(d_cell(s, n, cutoff));
    auto c = compute(cells, lo, [&](const DKey& k) {
        PolyDiffOp x;
        x.add(k, 1);
        return total_d_D(P, x).terms;
    });
    for (int i = 0; i <= hi - lo; ++i) {
        const auto& cell = cells[i + 1];
        const int dim = static_cast<int>(cell.basis.size());
        auto span = c.bounds[i];
        int base = rank_of(span, dim);
        for (const auto& z : T.t_reps[i]) span.push_back(coordinates(cell, hkr(s, z).terms));
        out.rank_T.push_back(T.ranks[i]);
        out.rank_D.push_back(c.ranks[i]);
        out.rank_map.push_back(rank_of(span, dim) - base);
    }
    return out;
}

// ---------------------------------------------------------------------------

void VDiffOp::add(const std::vector<Exps>& key, const GradedElement& c)
{
    if (c.is_zero()) return;
    auto it = terms.find(key);
    if (it == terms.end()) {
        GradedElement e(trunc);
        e += c;
        if (trunc >= 0) e = truncate(e, trunc);
        if (!e.is_zero()) terms.emplace(key, e);
        return;
    }
    it->second += c;
    if (trunc >= 0) it->second = truncate(it->second, trunc);
    if (it->second.is_zero()) terms.erase(it);
}

VDiffOp& VDiffOp::operator+=(const VDiffOp& o)
{
    trunc = min_trunc(trunc, o.trunc);
    for (const auto& [k, c] : o.terms) add(k, c);
    return *this;
}

VDiffOp& VDiffOp::operator-=(const VDiffOp& o)
{
    trunc = min_trunc(trunc, o.trunc);
    for (const auto& [k, c] : o.terms) add(k, -c);
    return *this;
}

VDiffOp& VDiffOp::operator*=(const Rat& c)
{
    if (c == 0) terms.clear();
    for (auto& kv : terms) kv.second *= c;
    return *this;
}

bool VDiffOp::operator==(const VDiffOp& o) const
{
    if (terms.size() != o.terms.size()) return false;
    for (const auto& [k, c] : terms) {
        auto it = o.terms.find(k);
        if (it == o.terms.end() || !(it->second == c)) return false;
    }
    return true;
}

VDiffOp operator+(VDiffOp a, const VDiffOp& b) { return a += b; }
VDiffOp operator-(VDiffOp a, const VDiffOp& b) { return a -= b; }
VDiffOp operator*(const Rat& c, VDiffOp a) { return a *= c; }

std::string VDiffOp::str() const
{
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")";
        for (size_t i = 0; i < k.size(); ++i) {
            os << (i ? "(x)" : " ") << "d[";
            for (int j = 0; j < kMaxEven; ++j) os << (j ? "," : "") << int(k[i][j]);
            os << "]";
        }
    }
    return first ? "0" : os.str();
}

VDiffOp multiplication_op(int trunc)
{
    VDiffOp m;
    m.trunc = trunc;
    m.add({Exps{}, Exps{}}, GradedElement::one(trunc));
    return m;
}

GradedElement chi_derivative(const Exps& J, const GradedElement& f)
{
    GradedElement g = f;
    for (int k = 0; k < kMaxEven; ++k)
        for (int e = 0; e < J[k]; ++e) g = contract({Gen::Chi, k}, g);
    return g;
}

GradedElement apply(const VDiffOp& op, const std::vector<GradedElement>& args)
{
    for (const auto& a : args)
        for (const auto& kv : a.terms)
            if (kv.first.degree()) throw std::invalid_argument("apply: arguments must be even functions");
    GradedElement out(op.trunc);
    for (const auto& [k, c] : op.terms) {
        if (k.size() != args.size()) throw std::invalid_argument("apply: arity mismatch");
        GradedElement t = c;
        for (size_t i = 0; i < k.size(); ++i) t = t * chi_derivative(k[i], args[i]);
        out += t;
    }
    return out;
}

VDiffOp star(const VDiffOp& a, const VDiffOp& b)
{
    VDiffOp out;
    out.trunc = min_trunc(a.trunc, b.trunc);
    for (const auto& [ka, ca] : a.terms)
        for (const auto& [kb, cb] : b.terms) {
            const int u = static_cast<int>(ka.size()) - 1, v = static_cast<int>(kb.size()) - 1;
            if (u < 0) continue; // a function has no slot to insert into
            for (const auto& [wa, xa] : ca.terms)
                for (const auto& [wb, xb] : cb.terms) {
                    // split off the odd constant coefficients: (c1 x1) * (c2 x2) = (-1)^{|x1||c2|} c1 c2 (x1 * x2)
                    Word la, lb, lab;
                    la.lam = wa.lam;
                    lb.lam = wb.lam;
                    int sign = 1;
                    if (!word_product(la, lb, lab, sign)) continue;
                    sign *= sgn(u * std::popcount(wb.lam));
                    Word fa = wa, fb = wb;
                    fa.lam = fb.lam = 0;
                    GradedElement f = GradedElement::monomial(lab, sign * xa * xb, out.trunc) *
                                      GradedElement::monomial(fa, 1, out.trunc);
                    GradedElement g = GradedElement::monomial(fb, 1, out.trunc);
                    for (int k = 0; k <= u; ++k) {
                        // distribute d^{J_k} over g and the v+1 inner factors
                        std::vector<Exps> inner(kb.begin(), kb.end());
                        std::function<void(int, const Exps&, const Rat&, const GradedElement&)> rec =
                            [&](int slot, const Exps& left, const Rat& coef, const GradedElement& gg) {
                                if (slot == v) {
                                    std::vector<Exps> key(ka.begin(), ka.begin() + k);
                                    for (int t = 0; t < v; ++t) key.push_back(inner[t]);
                                    key.push_back(plus(inner[v], left));
                                    key.insert(key.end(), ka.begin() + k + 1, ka.end());
                                    out.add(key, sgn(k * v) * coef * (f * gg));
                                    return;
                                }
                                for_each_sub(left, [&](const Exps& M, const Rat& bc) {
                                    Exps saved = inner[slot];
                                    inner[slot] = plus(saved, M);
                                    rec(slot + 1, minus(left, M), coef * bc, gg);
                                    inner[slot] = saved;
                                });
                            };
                        for_each_sub(ka[k], [&](const Exps& M, const Rat& bc) {
                            GradedElement dg = chi_derivative(M, g);
                            if (dg.is_zero()) return;
                            rec(0, minus(ka[k], M), bc, dg);
                        });
                    }
                }
        }
    return out;
}

namespace {

std::map<int, VDiffOp> by_degree(const VDiffOp& a)
{
    std::map<int, VDiffOp> parts;
    for (const auto& [k, c] : a.terms)
        for (const auto& [w, x] : c.terms) {
            int d = std::popcount(w.lam) + static_cast<int>(k.size()) - 1;
            auto& p = parts[d];
            p.trunc = a.trunc;
            p.add(k, GradedElement::monomial(w, x, a.trunc));
        }
    return parts;
}

} // namespace

VDiffOp gerstenhaber(const VDiffOp& a, const VDiffOp& b)
{
    VDiffOp out;
    out.trunc = min_trunc(a.trunc, b.trunc);
    for (const auto& [da, pa] : by_degree(a))
        for (const auto& [db, pb] : by_degree(b)) {
            out += star(pa, pb);
            VDiffOp back = star(pb, pa);
            back *= sgn(da * db);
            out -= back;
        }
    return out;
}

void gerstenhaber(const PolyDiffOp&, const PolyDiffOp&)
{
    throw std::domain_error("gerstenhaber: the bracket does not extend to pair-side D_poly; "
                            "use the Fedosov-side operators (VDiffOp)");
}

VDiffOp vertical_hkr(const GradedElement& x)
{
    VDiffOp out;
    out.trunc = x.trunc;
    for (const auto& [w, c] : x.terms) {
        if (w.th) throw std::invalid_argument("vertical_hkr: fibre forms are not polyvectors");
        std::vector<int> e = bits_of(w.eps);
        Word f = w;
        f.eps = 0;
        std::vector<int> perm(e.size());
        std::iota(perm.begin(), perm.end(), 0);
        Rat scale = c / factorial(static_cast<int>(e.size()));
        do {
            std::vector<Exps> key;
            for (int p : perm) key.push_back(MultiIndex::unit(e[p]));
            out.add(key, GradedElement::monomial(f, permutation_sign(perm) * scale, x.trunc));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

int vdiff_degree(const VDiffOp& x)
{
    auto parts = by_degree(x);
    if (parts.size() > 1) throw std::invalid_argument("vdiff_degree: inhomogeneous operator");
    return parts.empty() ? 0 : parts.begin()->first;
}

} // namespace lpf
