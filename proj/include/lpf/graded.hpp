#pragma once

#include "lpf/rational.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpf {

constexpr int kMaxOdd = 24;
constexpr int kMaxEven = 8;

// Generator kinds of the working algebra.
//   Lam: odd, frame of L^vee (degree 1)
//   Eps: odd, B-frame slot of a polyvector (unshifted degree 1)
//   Th:  odd, fibre 1-form dual to Eps
//   Chi: even, frame of B^vee, truncated at trunc
//   X:   even, base chart coordinate, never truncated
enum class Gen : std::uint8_t { Lam, Eps, Th, Chi, X };

struct GenId {
    Gen kind;
    int idx;
    bool odd() const { return kind == Gen::Lam || kind == Gen::Eps || kind == Gen::Th; }
};

using Exps = std::array<std::uint8_t, kMaxEven>;

struct MultiIndex {
    static int norm(const Exps& e);
    static Rat fact(const Exps& e);
    static Exps unit(int k);
};

struct Word {
    std::uint32_t lam = 0, eps = 0, th = 0;
    Exps chi{}, x{};

    auto operator<=>(const Word&) const = default;
    bool operator==(const Word&) const = default;

    int sdeg() const { return MultiIndex::norm(chi); }
    int odd_count() const;
    int degree() const { return odd_count(); }
};

class GradedElement {
public:
    std::map<Word, Rat> terms;
    int trunc = -1; // -1: unbounded

    GradedElement() = default;
    explicit GradedElement(int trunc_) : trunc(trunc_) {}

    static GradedElement scalar(const Rat& c, int trunc = -1);
    static GradedElement one(int trunc = -1) { return scalar(1, trunc); }
    static GradedElement gen(GenId g, int trunc = -1);
    static GradedElement monomial(const Word& w, const Rat& c, int trunc = -1);

    bool is_zero() const { return terms.empty(); }
    void add_term(const Word& w, const Rat& c);

    GradedElement& operator+=(const GradedElement& o);
    GradedElement& operator-=(const GradedElement& o);
    GradedElement& operator*=(const Rat& c);
    GradedElement operator-() const;

    bool operator==(const GradedElement& o) const { return terms == o.terms; }

    GradedElement filter(const std::function<bool(const Word&)>& keep) const;
    // true if every term has the same odd count
    std::optional<int> homogeneous_degree() const;
    int max_sdeg() const;

    std::string str() const;
};

GradedElement operator+(GradedElement a, const GradedElement& b);
GradedElement operator-(GradedElement a, const GradedElement& b);
GradedElement operator*(GradedElement a, const Rat& c);
GradedElement operator*(const Rat& c, GradedElement a);

// associative graded-commutative product, truncated at the smaller cutoff
GradedElement product(const GradedElement& a, const GradedElement& b);
inline GradedElement operator*(const GradedElement& a, const GradedElement& b) { return product(a, b); }

// sign of moving the ordered list with given parities into permuted order:
// v_{p(0)}...v_{p(n-1)} = sign * v_0...v_{n-1}
int koszul_sign(const std::vector<int>& perm, const std::vector<int>& degrees);

// left partial derivative w.r.t. a generator (interior product for odd ones)
GradedElement contract(GenId g, const GradedElement& a);

GradedElement truncate(const GradedElement& a, int N);

// product of two words; returns false when an odd generator repeats
bool word_product(const Word& a, const Word& b, Word& out, int& sign);

struct Derivation {
    int degree = 0;
    std::vector<std::optional<GradedElement>> lam, eps, th, chi, x;

    Derivation() = default;
    Derivation(int deg, int nlam, int neps, int nth, int nchi, int nx);

    std::optional<GradedElement>& slot(GenId g);
    const std::optional<GradedElement>& slot(GenId g) const;
    void set(GenId g, GradedElement img) { slot(g) = std::move(img); }
    // fill every unset image with zero
    void complete_with_zero();
};

GradedElement apply(const Derivation& D, const GradedElement& a);

// graded commutator [D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1, as a derivation
Derivation commutator(const Derivation& D1, const Derivation& D2);

Derivation operator+(const Derivation& a, const Derivation& b);
Derivation scaled(const Derivation& a, const Rat& c);

// all images equal zero
bool is_zero(const Derivation& D);

} // namespace lpf
