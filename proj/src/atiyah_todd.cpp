#include "lpf/atiyah_todd.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace lpf {

namespace {

GradedElement th(int i) { return GradedElement::gen({Gen::Th, i}); }
GradedElement lam(int i) { return GradedElement::gen({Gen::Lam, i}); }

GradedElement th_at_most(const GradedElement& a, int K)
{
    return a.filter([&](const Word& w) { return std::popcount(w.th) <= K; });
}

} // namespace

Series series_mul(const Series& a, const Series& b, int K)
{
    Series c(K + 1);
    for (int i = 0; i <= K && i < static_cast<int>(a.size()); ++i)
        for (int j = 0; i + j <= K && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Series series_inverse(const Series& a, int K)
{
    if (a.empty() || a[0] == 0) throw std::invalid_argument("series_inverse: constant term is zero");
    Series b(K + 1);
    b[0] = 1 / a[0];
    for (int n = 1; n <= K; ++n) {
        Rat s = 0;
        for (int i = 1; i <= n && i < static_cast<int>(a.size()); ++i) s += a[i] * b[n - i];
        b[n] = -s / a[0];
    }
    return b;
}

Series series_log(const Series& a, int K)
{
    if (a.empty() || a[0] != 1) throw std::invalid_argument("series_log: constant term must be 1");
    // (log a)' = a'/a
    Series da(K + 1);
    for (int n = 1; n <= K && n < static_cast<int>(a.size()); ++n) da[n - 1] = n * a[n];
    Series q = series_mul(da, series_inverse(a, K), K);
    Series out(K + 1);
    for (int n = 1; n <= K; ++n) out[n] = q[n - 1] / n;
    return out;
}

Series series_exp(const Series& a, int K)
{
    if (!a.empty() && a[0] != 0) throw std::invalid_argument("series_exp: constant term must be 0");
    // E' = a' E
    Series e(K + 1);
    e[0] = 1;
    for (int n = 1; n <= K; ++n) {
        Rat s = 0;
        for (int k = 1; k <= n && k < static_cast<int>(a.size()); ++k) s += k * a[k] * e[n - k];
        e[n] = s / n;
    }
    return e;
}

Series series_pow(const Series& a, const Rat& t, int K)
{
    Series l = series_log(a, K);
    for (auto& c : l) c *= t;
    return series_exp(l, K);
}

Series todd_series(ToddKind kind, int K)
{
    Series den(K + 1);
    const bool twisted = kind == ToddKind::TTodd || kind == ToddKind::SqrtTTodd;
    for (int n = 0; n <= K; ++n) {
        if (twisted) {
            // (e^{x/2} - e^{-x/2})/x = sum_m (x/2)^{2m} / (2m+1)!
            if (n % 2 == 0) den[n] = 1 / (factorial(n + 1) * Rat(boost::multiprecision::mpz_int(1) << n));
        } else {
            // (1 - e^{-x})/x = sum_n (-1)^n x^n / (n+1)!
            den[n] = (n % 2 ? Rat(-1) : Rat(1)) / factorial(n + 1);
        }
    }
    Series s = series_inverse(den, K);
    if (kind == ToddKind::SqrtTd || kind == ToddKind::SqrtTTodd) s = series_pow(s, rat(1, 2), K);
    return s;
}

FormMatrix matmul(const FormMatrix& a, const FormMatrix& b)
{
    if (a.r != b.r) throw std::invalid_argument("matmul: size mismatch");
    FormMatrix c(a.r);
    for (int i = 0; i < a.r; ++i)
        for (int k = 0; k < a.r; ++k) {
            if (a(i, k).is_zero()) continue;
            for (int j = 0; j < a.r; ++j)
                if (!b(k, j).is_zero()) c(i, j) += a(i, k) * b(k, j);
        }
    return c;
}

GradedElement trace(const FormMatrix& a)
{
    GradedElement t;
    for (int i = 0; i < a.r; ++i) t += a(i, i);
    return t;
}

FormMatrix map_entries(const FormMatrix& a, const std::function<GradedElement(const GradedElement&)>& f)
{
    FormMatrix b(a.r);
    for (size_t i = 0; i < a.e.size(); ++i) b.e[i] = f(a.e[i]);
    return b;
}

FormMatrix atiyah_cocycle_pair(const LiePairSpec& s, const ConnectionSpec& conn)
{
    if (!extends_bott(s, conn)) throw std::invalid_argument("atiyah_cocycle_pair: connection does not extend the Bott connection");
    const int r = s.r();
    auto R = curvature(s, conn);
    FormMatrix M(r);
    for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
            for (int a = 0; a < s.rA; ++a)
                for (int n = 0; n < r; ++n)
                    if (!R.r11(a, n, j, k).is_zero()) M(j, k) += R.r11(a, n, j, k) * (lam(a) * th(n));
    return M;
}

FormMatrix atiyah_cocycle_fedosov(const FedosovData& F)
{
    if (F.N < 3) throw std::invalid_argument("atiyah_cocycle_fedosov: needs truncation N >= 3");
    const int r = F.spec.r();
    VField f(r, GradedElement(F.N));
    for (int t = 2; t <= F.N && t < static_cast<int>(F.X.size()); ++t)
        for (int k = 0; k < r && k < static_cast<int>(F.X[t].size()); ++k) f[k] += F.X[t][k];
    FormMatrix M(r);
    for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) {
            GradedElement dj = contract({Gen::Chi, j}, f[k]);
            for (int i = 0; i < r; ++i) M(j, k) += contract({Gen::Chi, i}, dj) * th(i);
        }
    return M;
}

Derivation ce_Aperp_derivation(const LiePairSpec& s)
{
    const int rA = s.rA, r = s.r();
    Derivation D = ce_derivation(s, rA);
    for (int m = 0; m < r; ++m) {
        GradedElement v;
        for (int a = 0; a < rA; ++a)
            for (int k = 0; k < r; ++k)
                if (!s.C(a, rA + k, rA + m).is_zero()) v -= s.C(a, rA + k, rA + m) * (lam(a) * th(k));
        D.th[m] = v;
    }
    return D;
}

GradedElement divergence(const FedosovData& F)
{
    GradedElement d(F.N);
    for (int k = 0; k < F.spec.r(); ++k)
        for (int t = 2; t < static_cast<int>(F.X.size()); ++t)
            if (k < static_cast<int>(F.X[t].size())) d += contract({Gen::Chi, k}, F.X[t][k]);
    return d;
}

GradedElement fedosov_d_function(const LiePairSpec& s, const GradedElement& g)
{
    GradedElement out(g.trunc);
    for (int i = 0; i < s.r(); ++i) out += contract({Gen::Chi, i}, g) * th(i);
    return out;
}

GradedElement ToddCocycle::total() const
{
    GradedElement t;
    for (const auto& c : components) t += c;
    return t;
}

ToddCocycle todd_cocycle(const FormMatrix& at, ToddKind kind, int K)
{
    Series logf = series_log(todd_series(kind, K), K);
    GradedElement x;
    FormMatrix power = at;
    for (int s = 1; s <= K; ++s) {
        if (s > 1) power = matmul(power, at);
        if (logf[s] != 0) x += logf[s] * trace(power);
    }
    x = th_at_most(x, K);
    GradedElement total = GradedElement::one(), term = GradedElement::one();
    for (int n = 1; n <= K; ++n) {
        term = th_at_most(term * x, K);
        if (term.is_zero()) break;
        total += term * (1 / factorial(n));
    }
    ToddCocycle out;
    out.components.resize(K + 1);
    for (const auto& [w, c] : total.terms) out.components[std::popcount(w.th)].add_term(w, c);
    return out;
}

GradedElement todd_determinant(const FormMatrix& at, ToddKind kind, int K)
{
    const int r = at.r;
    Series c = todd_series(kind, K);
    FormMatrix f(r), power(r);
    for (int i = 0; i < r; ++i) power(i, i) = GradedElement::one();
    for (int s = 0; s <= K; ++s) {
        if (s > 0) power = matmul(power, at);
        for (size_t i = 0; i < f.e.size(); ++i)
            if (!power.e[i].is_zero()) f.e[i] += c[s] * power.e[i];
    }
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    GradedElement det;
    do {
        int inv = 0;
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j)
                if (perm[i] > perm[j]) ++inv;
        GradedElement t = GradedElement::one();
        for (int i = 0; i < r && !t.is_zero(); ++i) t = th_at_most(t * f(i, perm[i]), K);
        det += inv % 2 ? -t : t;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return th_at_most(det, K);
}

std::vector<GradedElement> scalar_traces(const FormMatrix& at, int K)
{
    std::vector<GradedElement> out;
    FormMatrix power = at;
    for (int k = 1; k <= K; ++k) {
        if (k > 1) power = matmul(power, at);
        out.push_back(trace(power));
    }
    return out;
}

GradedElement contract_by(const GradedElement& form, const GradedElement& target)
{
    GradedElement out(target.trunc);
    for (const auto& [w, c] : form.terms) {
        Word cw = w;
        cw.th = 0;
        GradedElement t = target;
        for (int i = 31; i >= 0 && !t.is_zero(); --i)
            if (w.th >> i & 1u) t = contract({Gen::Eps, i}, t);
        if (!t.is_zero()) out += GradedElement::monomial(cw, c, form.trunc) * t;
    }
    return out;
}

GradedElement contract_exp(const GradedElement& form, const Rat& t, const GradedElement& target)
{
    GradedElement out = target, term = target;
    Rat tn = 1;
    for (int n = 1; n <= 64; ++n) {
        term = contract_by(form, term);
        if (term.is_zero()) return out;
        tn *= t;
        out += term * (tn / factorial(n));
    }
    throw std::domain_error("contract_exp: contraction is not nilpotent on the target");
}

} // namespace lpf
