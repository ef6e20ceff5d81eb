#include "lpf/duflo.hpp"

#include "lpf/atiyah_todd.hpp"
#include "lpf/linalg.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace lpf {

namespace {

GradedElement xg(int i) { return GradedElement::gen({Gen::X, i}); }

void monomials_of_degree(int n, int d, std::vector<Exps>& out)
{
    Exps e{};
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            e[i] = static_cast<std::uint8_t>(left);
            out.push_back(e);
            return;
        }
        for (int k = left; k >= 0; --k) {
            e[i] = static_cast<std::uint8_t>(k);
            rec(i + 1, left - k);
        }
    };
    if (n == 0) {
        if (d == 0) out.push_back(e);
        return;
    }
    rec(0, d);
}

Word xword(const Exps& e)
{
    Word w;
    w.x = e;
    return w;
}

// nonzero vectors of a kernel basis as exact rational rows
std::vector<std::vector<Rat>> kernel_of(const std::vector<std::vector<Rat>>& columns, int rows)
{
    Matrix M(rows, static_cast<int>(columns.size()));
    for (size_t j = 0; j < columns.size(); ++j)
        for (int i = 0; i < rows; ++i) M(i, static_cast<int>(j)) = columns[j][i];
    return kernel(M);
}

} // namespace

LieAlgebra lie_algebra_of(const LiePairSpec& s)
{
    if (s.base != BaseKind::Point) throw std::domain_error("lie_algebra_of: needs a point base");
    if (s.l > kMaxEven) throw std::invalid_argument("lie_algebra_of: dimension above 8 is not supported");
    LieAlgebra g;
    g.n = s.l;
    g.c.resize(static_cast<size_t>(s.l) * s.l * s.l);
    for (int i = 0; i < s.l; ++i)
        for (int j = 0; j < s.l; ++j)
            for (int k = 0; k < s.l; ++k) {
                const Poly& p = s.C(i, j, k);
                if (p.is_zero()) continue;
                if (p.terms.size() != 1 || p.terms.begin()->first != Word{})
                    throw std::domain_error("lie_algebra_of: structure constants must be constant");
                g.c[(i * s.l + j) * s.l + k] = p.terms.begin()->second;
            }
    g.names = s.names;
    return g;
}

Uea enveloping(const LieAlgebra& g) { return Uea(g.n, g.c); }

Uea::Elem uea_product(const Uea& U, const Uea::Elem& a, const Uea::Elem& b) { return U.multiply(a, b); }

Uea::Elem pbw_sym(const Uea& U, const SymElem& s)
{
    Uea::Elem out;
    for (const auto& [w, c] : s.terms) {
        if (w.degree() || w.sdeg()) throw std::invalid_argument("pbw_sym: input must be a polynomial in the X generators");
        Uea::Mono letters;
        for (int i = 0; i < kMaxEven; ++i)
            for (int e = 0; e < w.x[i]; ++e) letters.push_back(i);
        const int n = static_cast<int>(letters.size());
        // distinct orderings each stand for prod K_i! of the n! permutations
        Rat weight = c * MultiIndex::fact(w.x) / factorial(n);
        do add_to(out, U.normal(letters), weight);
        while (std::next_permutation(letters.begin(), letters.end()));
    }
    return out;
}

SymElem ad_sym(const LieAlgebra& g, int a, const SymElem& s)
{
    Derivation D(0, 0, 0, 0, 0, g.n);
    for (int i = 0; i < g.n; ++i) {
        GradedElement v;
        for (int k = 0; k < g.n; ++k)
            if (g.C(a, i, k) != 0) v += g.C(a, i, k) * xg(k);
        D.x[i] = v;
    }
    return apply(D, s);
}

DualSeries duflo_element(const LieAlgebra& g, int K, bool square_root)
{
    // ad_x(x_j) = sum_i chi_i c_ij^k x_k
    FormMatrix M(g.n);
    for (int j = 0; j < g.n; ++j)
        for (int k = 0; k < g.n; ++k) {
            GradedElement v(K);
            for (int i = 0; i < g.n; ++i)
                if (g.C(i, j, k) != 0) v += g.C(i, j, k) * GradedElement::gen({Gen::Chi, i}, K);
            M(j, k) = v;
        }
    // (1 - e^{-y}) / y
    Series f(K + 1);
    for (int n = 0; n <= K; ++n) f[n] = (n % 2 ? Rat(-1) : Rat(1)) / factorial(n + 1);
    Series logf = series_log(f, K);
    GradedElement x(K);
    FormMatrix power = M;
    for (int s = 1; s <= K; ++s) {
        if (s > 1) power = matmul(power, M);
        if (logf[s] != 0) x += logf[s] * trace(power);
    }
    if (square_root) x *= rat(1, 2);
    GradedElement total = GradedElement::one(K), term = GradedElement::one(K);
    for (int n = 1; n <= K; ++n) {
        term = term * x;
        if (term.is_zero()) break;
        total += term * (1 / factorial(n));
    }
    return total;
}

SymElem apply_duflo(const DualSeries& J, const SymElem& s)
{
    SymElem out;
    for (const auto& [w, c] : J.terms) {
        SymElem t = s;
        for (int i = 0; i < kMaxEven && !t.is_zero(); ++i)
            for (int e = 0; e < w.chi[i] && !t.is_zero(); ++e) t = contract({Gen::X, i}, t);
        if (!t.is_zero()) out += c * t;
    }
    return out;
}

std::vector<SymElem> sym_invariants(const LieAlgebra& g, int d)
{
    std::vector<SymElem> out;
    for (int deg = 0; deg <= d; ++deg) {
        std::vector<Exps> basis;
        monomials_of_degree(g.n, deg, basis);
        std::map<Exps, int> idx;
        for (size_t i = 0; i < basis.size(); ++i) idx[basis[i]] = static_cast<int>(i);
        const int B = static_cast<int>(basis.size());
        std::vector<std::vector<Rat>> cols;
        for (const auto& e : basis) {
            std::vector<Rat> col(static_cast<size_t>(B) * g.n);
            for (int a = 0; a < g.n; ++a)
                for (const auto& [w, c] : ad_sym(g, a, GradedElement::monomial(xword(e), 1)).terms)
                    col[a * B + idx.at(w.x)] = c;
            cols.push_back(col);
        }
        for (const auto& v : kernel_of(cols, B * g.n)) {
            SymElem p;
            for (int i = 0; i < B; ++i) p.add_term(xword(basis[i]), v[i]);
            out.push_back(p);
        }
    }
    return out;
}

std::vector<Uea::Elem> uea_invariants(const LieAlgebra& g, int d)
{
    Uea U = enveloping(g);
    std::vector<Uea::Mono> basis;
    for (int deg = 0; deg <= d; ++deg) {
        std::vector<Exps> mons;
        monomials_of_degree(g.n, deg, mons);
        for (const auto& e : mons) {
            Uea::Mono m;
            for (int i = 0; i < g.n; ++i)
                for (int k = 0; k < e[i]; ++k) m.push_back(i);
            basis.push_back(m);
        }
    }
    std::map<Uea::Mono, int> idx;
    for (size_t i = 0; i < basis.size(); ++i) idx[basis[i]] = static_cast<int>(i);
    const int B = static_cast<int>(basis.size());
    std::vector<std::vector<Rat>> cols;
    for (const auto& m : basis) {
        std::vector<Rat> col(static_cast<size_t>(B) * g.n);
        for (int a = 0; a < g.n; ++a)
            for (const auto& [w, c] : U.commutator(Uea::basis(a), {{m, Rat(1)}})) col[a * B + idx.at(w)] = c;
        cols.push_back(col);
    }
    std::vector<Uea::Elem> out;
    for (const auto& v : kernel_of(cols, B * g.n)) {
        Uea::Elem u;
        for (int i = 0; i < B; ++i)
            if (v[i] != 0) u[basis[i]] = v[i];
        out.push_back(u);
    }
    return out;
}

bool DufloReport::all_multiplicative() const
{
    return std::all_of(pairs.begin(), pairs.end(), [](const DufloPair& p) { return p.multiplicative; });
}

bool DufloReport::plain_discrepancy_seen() const
{
    return std::any_of(pairs.begin(), pairs.end(), [](const DufloPair& p) { return !p.plain_discrepancy.empty(); });
}

DufloReport duflo_check(const LieAlgebra& g, int d)
{
    DufloReport rep;
    rep.degree = d;
    rep.invariants = sym_invariants(g, d);
    Uea U = enveloping(g);
    DualSeries Jh = duflo_element(g, d, true);
    auto deg = [](const SymElem& p) {
        int m = 0;
        for (const auto& kv : p.terms) m = std::max(m, MultiIndex::norm(kv.first.x));
        return m;
    };
    auto dpbw = [&](const SymElem& p) { return pbw_sym(U, apply_duflo(Jh, p)); };
    for (size_t i = 0; i < rep.invariants.size(); ++i)
        for (size_t j = i; j < rep.invariants.size(); ++j) {
            const auto& p = rep.invariants[i];
            const auto& q = rep.invariants[j];
            if (deg(p) + deg(q) > d) continue;
            DufloPair dp{p, q, false, {}};
            dp.multiplicative = dpbw(p * q) == U.multiply(dpbw(p), dpbw(q));
            dp.plain_discrepancy = pbw_sym(U, p * q);
            add_to(dp.plain_discrepancy, U.multiply(pbw_sym(U, p), pbw_sym(U, q)), -1);
            rep.pairs.push_back(dp);
        }
    return rep;
}

std::string uea_str(const LieAlgebra& g, const Uea::Elem& a)
{
    auto name = [&](int i) { return i < static_cast<int>(g.names.size()) ? g.names[i] : "x" + std::to_string(i); };
    if (a.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : a) {
        if (!first) os << " + ";
        first = false;
        os << to_pq(c);
        for (int i : m) os << "*" << name(i);
    }
    return os.str();
}

std::string sym_str(const LieAlgebra& g, const SymElem& s)
{
    auto name = [&](int i) { return i < static_cast<int>(g.names.size()) ? g.names[i] : "x" + std::to_string(i); };
    if (s.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : s.terms) {
        if (!first) os << " + ";
        first = false;
        os << to_pq(c);
        for (int i = 0; i < kMaxEven; ++i)
            if (w.x[i]) os << "*" << name(i) << (w.x[i] > 1 ? "^" + std::to_string(w.x[i]) : "");
    }
    return os.str();
}

} // namespace lpf
