#pragma once

#include "lpf/graded.hpp"
#include "lpf/liepair.hpp"

#include <random>

namespace lpf::test {

struct Shape {
    int nlam = 3, neps = 0, nth = 0, nchi = 2, nx = 0;
    int max_sdeg = 3;
    int max_xdeg = 0;
    int trunc = -1;
    int terms = 4;
    int coef_range = 5;
};

inline Rat random_rat(std::mt19937_64& g, int range)
{
    std::uniform_int_distribution<int> num(-range, range), den(1, 3);
    int n = 0;
    while (n == 0) n = num(g);
    return rat(n, den(g));
}

inline Word random_word(std::mt19937_64& g, const Shape& s)
{
    Word w;
    auto bits = [&](int n) {
        std::uint32_t m = 0;
        for (int i = 0; i < n; ++i)
            if (g() & 1) m |= 1u << i;
        return m;
    };
    w.lam = bits(s.nlam);
    w.eps = bits(s.neps);
    w.th = bits(s.nth);
    if (s.nchi > 0) {
        std::uniform_int_distribution<int> deg(0, s.max_sdeg), which(0, s.nchi - 1);
        int d = deg(g);
        for (int i = 0; i < d; ++i) w.chi[which(g)]++;
    }
    if (s.nx > 0) {
        std::uniform_int_distribution<int> deg(0, s.max_xdeg), which(0, s.nx - 1);
        int d = deg(g);
        for (int i = 0; i < d; ++i) w.x[which(g)]++;
    }
    return w;
}

inline GradedElement random_element(std::mt19937_64& g, const Shape& s)
{
    GradedElement e(s.trunc);
    for (int t = 0; t < s.terms; ++t) e.add_term(random_word(g, s), random_rat(g, s.coef_range));
    return e;
}

// homogeneous in the odd degree
inline GradedElement random_homogeneous(std::mt19937_64& g, const Shape& s, int degree)
{
    GradedElement e(s.trunc);
    int guard = 0;
    while (static_cast<int>(e.terms.size()) < s.terms && guard++ < 1000) {
        Word w = random_word(g, s);
        if (w.degree() == degree) e.add_term(w, random_rat(g, s.coef_range));
    }
    return e;
}

// g = span{a, b}, [a, b] = b, A = span{a}
inline LiePairSpec solvable_pair()
{
    LiePairSpec s(2, 1);
    s.set_bracket(0, 1, 1, GradedElement::one());
    s.names = {"a", "b"};
    return s;
}

// sl2 with frame (e, h, f), [e,f] = h, [h,e] = 2e, [h,f] = -2f, A = span{e}
inline LiePairSpec sl2_pair()
{
    LiePairSpec s(3, 1);
    s.set_bracket(0, 2, 1, GradedElement::one());
    s.set_bracket(1, 0, 0, GradedElement::scalar(2));
    s.set_bracket(1, 2, 2, GradedElement::scalar(-2));
    s.names = {"e", "h", "f"};
    return s;
}

inline LiePairSpec abelian_pair(int l = 2, int rA = 1)
{
    return LiePairSpec(l, rA);
}

// Bott extension with zero B-rows, made torsion-free
inline ConnectionSpec torsion_free_connection(const LiePairSpec& s)
{
    return make_torsion_free(s, bott_connection(s));
}

} // namespace lpf::test
