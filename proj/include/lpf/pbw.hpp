#pragma once

#include "lpf/rational.hpp"

#include <map>
#include <vector>

namespace lpf {

// Universal enveloping algebra of a finite-dimensional Lie algebra with basis
// x_0..x_{n-1}; normal-ordered monomials are nondecreasing index sequences.
class Uea {
public:
    using Mono = std::vector<int>;
    using Elem = std::map<Mono, Rat>;

    Uea() = default;
    // c[(i*n+j)*n+k] : [x_i, x_j] = sum_k c_ij^k x_k
    Uea(int n, std::vector<Rat> c);

    int dim() const { return n_; }
    const Rat& C(int i, int j, int k) const { return c_[(i * n_ + j) * n_ + k]; }

    // normal form of an arbitrary word; each rewriting step x_i x_j -> x_j x_i + [x_i, x_j]
    // lowers the length or the number of inversions
    Elem normal(const Mono& w) const;
    Elem multiply(const Elem& a, const Elem& b) const;
    Elem commutator(const Elem& a, const Elem& b) const;

    static Elem one();
    static Elem basis(int i);

private:
    int n_ = 0;
    std::vector<Rat> c_;
    mutable std::map<Mono, Elem> cache_;
};

void add_to(Uea::Elem& acc, const Uea::Elem& a, const Rat& c = 1);
bool is_zero(const Uea::Elem& a);

} // namespace lpf
