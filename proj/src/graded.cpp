#include "lpf/graded.hpp"

#include <bit>
#include <sstream>

namespace lpf {

Rat parse_rat(const std::string& s)
{
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(s);
        Rat p(s.substr(0, slash)), q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator");
        return p / q;
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("not a rational: " + s);
    }
}

int MultiIndex::norm(const Exps& e)
{
    int s = 0;
    for (auto v : e) s += v;
    return s;
}

Rat MultiIndex::fact(const Exps& e)
{
    Rat f = 1;
    for (auto v : e) f *= factorial(v);
    return f;
}

Exps MultiIndex::unit(int k)
{
    Exps e{};
    e.at(k) = 1;
    return e;
}

int Word::odd_count() const
{
    return std::popcount(lam) + std::popcount(eps) + std::popcount(th);
}

namespace {

// parity of #{(i in a, j in b) : i > j}
int merge_parity(std::uint32_t a, std::uint32_t b)
{
    int p = 0;
    while (b) {
        int j = std::countr_zero(b);
        b &= b - 1;
        std::uint32_t above = (j >= 31) ? 0u : (a & ~((2u << j) - 1u));
        p += std::popcount(above);
    }
    return p & 1;
}

} // namespace

bool word_product(const Word& a, const Word& b, Word& out, int& sign)
{
    if ((a.lam & b.lam) || (a.eps & b.eps) || (a.th & b.th)) return false;
    int p = merge_parity(a.lam, b.lam);
    p += std::popcount(b.lam) * (std::popcount(a.eps) + std::popcount(a.th));
    p += merge_parity(a.eps, b.eps);
    p += std::popcount(b.eps) * std::popcount(a.th);
    p += merge_parity(a.th, b.th);
    out.lam = a.lam | b.lam;
    out.eps = a.eps | b.eps;
    out.th = a.th | b.th;
    for (int i = 0; i < kMaxEven; ++i) {
        int c = a.chi[i] + b.chi[i];
        int y = a.x[i] + b.x[i];
        if (c > 255 || y > 255) throw std::overflow_error("exponent overflow");
        out.chi[i] = static_cast<std::uint8_t>(c);
        out.x[i] = static_cast<std::uint8_t>(y);
    }
    sign = (p & 1) ? -1 : 1;
    return true;
}

GradedElement GradedElement::scalar(const Rat& c, int trunc)
{
    GradedElement e(trunc);
    e.add_term(Word{}, c);
    return e;
}

GradedElement GradedElement::gen(GenId g, int trunc)
{
    Word w;
    switch (g.kind) {
    case Gen::Lam: w.lam = 1u << g.idx; break;
    case Gen::Eps: w.eps = 1u << g.idx; break;
    case Gen::Th: w.th = 1u << g.idx; break;
    case Gen::Chi: w.chi.at(g.idx) = 1; break;
    case Gen::X: w.x.at(g.idx) = 1; break;
    }
    return monomial(w, 1, trunc);
}

GradedElement GradedElement::monomial(const Word& w, const Rat& c, int trunc)
{
    GradedElement e(trunc);
    e.add_term(w, c);
    return e;
}

void GradedElement::add_term(const Word& w, const Rat& c)
{
    if (c == 0) return;
    if (trunc >= 0 && w.sdeg() > trunc) return;
    auto [it, inserted] = terms.try_emplace(w, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
}

GradedElement& GradedElement::operator+=(const GradedElement& o)
{
    if (o.trunc >= 0 && (trunc < 0 || o.trunc < trunc)) {
        trunc = o.trunc;
        *this = truncate(*this, trunc);
    }
    for (const auto& [w, c] : o.terms) add_term(w, c);
    return *this;
}

GradedElement& GradedElement::operator-=(const GradedElement& o)
{
    return *this += -o;
}

GradedElement& GradedElement::operator*=(const Rat& c)
{
    if (c == 0) {
        terms.clear();
        return *this;
    }
    for (auto& kv : terms) kv.second *= c;
    return *this;
}

GradedElement GradedElement::operator-() const
{
    GradedElement r = *this;
    for (auto& kv : r.terms) kv.second = -kv.second;
    return r;
}

GradedElement operator+(GradedElement a, const GradedElement& b) { return a += b; }
GradedElement operator-(GradedElement a, const GradedElement& b) { return a -= b; }
GradedElement operator*(GradedElement a, const Rat& c) { return a *= c; }
GradedElement operator*(const Rat& c, GradedElement a) { return a *= c; }

GradedElement GradedElement::filter(const std::function<bool(const Word&)>& keep) const
{
    GradedElement r(trunc);
    for (const auto& [w, c] : terms)
        if (keep(w)) r.terms.emplace(w, c);
    return r;
}

std::optional<int> GradedElement::homogeneous_degree() const
{
    std::optional<int> d;
    for (const auto& kv : terms) {
        int k = kv.first.degree();
        if (d && *d != k) return std::nullopt;
        d = k;
    }
    return d ? d : std::optional<int>(0);
}

int GradedElement::max_sdeg() const
{
    int m = -1;
    for (const auto& kv : terms) m = std::max(m, kv.first.sdeg());
    return m;
}

std::string GradedElement::str() const
{
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << to_pq(c);
        auto bits = [&](std::uint32_t m, const char* name) {
            while (m) {
                int i = std::countr_zero(m);
                m &= m - 1;
                os << "*" << name << (i + 1);
            }
        };
        bits(w.lam, "l");
        bits(w.eps, "e");
        bits(w.th, "t");
        for (int i = 0; i < kMaxEven; ++i)
            if (w.chi[i]) os << "*c" << (i + 1) << (w.chi[i] > 1 ? "^" + std::to_string(w.chi[i]) : "");
        for (int i = 0; i < kMaxEven; ++i)
            if (w.x[i]) os << "*x" << (i + 1) << (w.x[i] > 1 ? "^" + std::to_string(w.x[i]) : "");
    }
    return os.str();
}

GradedElement product(const GradedElement& a, const GradedElement& b)
{
    int t = a.trunc < 0 ? b.trunc : (b.trunc < 0 ? a.trunc : std::min(a.trunc, b.trunc));
    GradedElement r(t);
    for (const auto& [wa, ca] : a.terms) {
        for (const auto& [wb, cb] : b.terms) {
            if (t >= 0 && wa.sdeg() + wb.sdeg() > t) continue;
            Word w;
            int s;
            if (!word_product(wa, wb, w, s)) continue;
            Rat c = ca * cb;
            if (s < 0) c = -c;
            r.add_term(w, c);
        }
    }
    return r;
}

int koszul_sign(const std::vector<int>& perm, const std::vector<int>& degrees)
{
    if (perm.size() != degrees.size()) throw std::invalid_argument("koszul_sign: length mismatch");
    int n = static_cast<int>(perm.size());
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (perm[i] > perm[j] && (degrees[perm[i]] & 1) && (degrees[perm[j]] & 1)) ++p;
    return (p & 1) ? -1 : 1;
}

GradedElement truncate(const GradedElement& a, int N)
{
    if (N < 0) return a;
    GradedElement r(a.trunc < 0 ? N : std::min(a.trunc, N));
    for (const auto& [w, c] : a.terms)
        if (w.sdeg() <= N) r.terms.emplace(w, c);
    return r;
}

namespace {

std::uint32_t& mask_of(Word& w, Gen k)
{
    if (k == Gen::Lam) return w.lam;
    if (k == Gen::Eps) return w.eps;
    return w.th;
}

// odd generators preceding generator (kind, idx) in canonical order
int odd_before(const Word& w, Gen k, int idx)
{
    std::uint32_t below = (1u << idx) - 1u;
    if (k == Gen::Lam) return std::popcount(w.lam & below);
    if (k == Gen::Eps) return std::popcount(w.lam) + std::popcount(w.eps & below);
    return std::popcount(w.lam) + std::popcount(w.eps) + std::popcount(w.th & below);
}

} // namespace

GradedElement contract(GenId g, const GradedElement& a)
{
    GradedElement r(a.trunc);
    for (const auto& [w, c] : a.terms) {
        Word v = w;
        if (g.odd()) {
            std::uint32_t& m = mask_of(v, g.kind);
            if (!(m & (1u << g.idx))) continue;
            m &= ~(1u << g.idx);
            int s = odd_before(w, g.kind, g.idx);
            r.add_term(v, (s & 1) ? Rat(-c) : c);
        } else {
            auto& e = (g.kind == Gen::Chi) ? v.chi : v.x;
            int k = e.at(g.idx);
            if (!k) continue;
            e[g.idx] = static_cast<std::uint8_t>(k - 1);
            r.add_term(v, c * k);
        }
    }
    return r;
}

Derivation::Derivation(int deg, int nlam, int neps, int nth, int nchi, int nx)
    : degree(deg), lam(nlam), eps(neps), th(nth), chi(nchi), x(nx)
{
}

std::optional<GradedElement>& Derivation::slot(GenId g)
{
    auto& v = g.kind == Gen::Lam ? lam : g.kind == Gen::Eps ? eps : g.kind == Gen::Th ? th : g.kind == Gen::Chi ? chi : x;
    if (g.idx < 0 || g.idx >= static_cast<int>(v.size())) throw std::out_of_range("derivation: generator index");
    return v[g.idx];
}

const std::optional<GradedElement>& Derivation::slot(GenId g) const
{
    return const_cast<Derivation*>(this)->slot(g);
}

void Derivation::complete_with_zero()
{
    for (auto* v : {&lam, &eps, &th, &chi, &x})
        for (auto& o : *v)
            if (!o) o = GradedElement();
}

namespace {

const GradedElement& image(const Derivation& D, GenId g)
{
    const auto& v = g.kind == Gen::Lam ? D.lam : g.kind == Gen::Eps ? D.eps : g.kind == Gen::Th ? D.th : g.kind == Gen::Chi ? D.chi : D.x;
    if (g.idx >= static_cast<int>(v.size()) || !v[g.idx])
        throw std::invalid_argument("derivation: missing image for a generator");
    return *v[g.idx];
}

} // namespace

GradedElement apply(const Derivation& D, const GradedElement& a)
{
    GradedElement r(a.trunc);
    for (const auto& [w, c] : a.terms) {
        int pos = 0;
        Word prefix;
        auto odd_pass = [&](Gen kind, std::uint32_t mask) {
            while (mask) {
                int i = std::countr_zero(mask);
                mask &= mask - 1;
                const GradedElement& img = image(D, {kind, i});
                if (!img.is_zero()) {
                    Word suffix = w;
                    suffix.lam &= ~prefix.lam;
                    suffix.eps &= ~prefix.eps;
                    suffix.th &= ~prefix.th;
                    mask_of(suffix, kind) &= ~(1u << i);
                    Rat cc = ((D.degree * pos) & 1) ? Rat(-c) : c;
                    GradedElement t = product(product(GradedElement::monomial(prefix, cc, a.trunc), img),
                                              GradedElement::monomial(suffix, 1, a.trunc));
                    r += t;
                }
                mask_of(prefix, kind) |= 1u << i;
                ++pos;
            }
        };
        odd_pass(Gen::Lam, w.lam);
        odd_pass(Gen::Eps, w.eps);
        odd_pass(Gen::Th, w.th);

        Word oddpart;
        oddpart.lam = w.lam;
        oddpart.eps = w.eps;
        oddpart.th = w.th;
        Rat sgn = ((D.degree * pos) & 1) ? Rat(-1) : Rat(1);
        auto even_pass = [&](Gen kind) {
            const Exps& e = kind == Gen::Chi ? w.chi : w.x;
            for (int i = 0; i < kMaxEven; ++i) {
                if (!e[i]) continue;
                const GradedElement& img = image(D, {kind, i});
                if (img.is_zero()) continue;
                Word rest;
                rest.chi = w.chi;
                rest.x = w.x;
                (kind == Gen::Chi ? rest.chi : rest.x)[i] -= 1;
                GradedElement t = product(product(GradedElement::monomial(oddpart, sgn * c * e[i], a.trunc), img),
                                          GradedElement::monomial(rest, 1, a.trunc));
                r += t;
            }
        };
        even_pass(Gen::Chi);
        even_pass(Gen::X);
    }
    return r;
}

namespace {

template <class F>
void for_each_slot(const Derivation& D, F f)
{
    const std::pair<Gen, const std::vector<std::optional<GradedElement>>*> all[] = {
        {Gen::Lam, &D.lam}, {Gen::Eps, &D.eps}, {Gen::Th, &D.th}, {Gen::Chi, &D.chi}, {Gen::X, &D.x}};
    for (auto& [k, v] : all)
        for (int i = 0; i < static_cast<int>(v->size()); ++i) f(GenId{k, i});
}

} // namespace

Derivation commutator(const Derivation& D1, const Derivation& D2)
{
    Derivation r(D1.degree + D2.degree, D1.lam.size(), D1.eps.size(), D1.th.size(), D1.chi.size(), D1.x.size());
    Rat s = ((D1.degree * D2.degree) & 1) ? Rat(-1) : Rat(1);
    for_each_slot(r, [&](GenId g) {
        const auto& a = D2.slot(g);
        const auto& b = D1.slot(g);
        GradedElement v;
        if (a) v += apply(D1, *a);
        if (b) v -= s * apply(D2, *b);
        r.slot(g) = v;
    });
    return r;
}

Derivation operator+(const Derivation& a, const Derivation& b)
{
    Derivation r = a;
    for_each_slot(r, [&](GenId g) {
        auto& o = r.slot(g);
        const auto& p = b.slot(g);
        if (!o) o = p;
        else if (p) *o += *p;
    });
    return r;
}

Derivation scaled(const Derivation& a, const Rat& c)
{
    Derivation r = a;
    for_each_slot(r, [&](GenId g) {
        auto& o = r.slot(g);
        if (o) *o *= c;
    });
    return r;
}

bool is_zero(const Derivation& D)
{
    bool z = true;
    for_each_slot(D, [&](GenId g) {
        const auto& o = D.slot(g);
        if (o && !o->is_zero()) z = false;
    });
    return z;
}

} // namespace lpf
