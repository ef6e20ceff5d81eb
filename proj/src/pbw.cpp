#include "lpf/pbw.hpp"

#include <stdexcept>

namespace lpf {

Uea::Uea(int n, std::vector<Rat> c) : n_(n), c_(std::move(c))
{
    if (static_cast<int>(c_.size()) != n * n * n) throw std::invalid_argument("Uea: structure constant count");
}

void add_to(Uea::Elem& acc, const Uea::Elem& a, const Rat& c)
{
    if (c == 0) return;
    for (const auto& [m, v] : a) {
        auto& slot = acc[m];
        slot += c * v;
        if (slot == 0) acc.erase(m);
    }
}

bool is_zero(const Uea::Elem& a) { return a.empty(); }

Uea::Elem Uea::one() { return {{Mono{}, Rat(1)}}; }

Uea::Elem Uea::basis(int i) { return {{Mono{i}, Rat(1)}}; }

Uea::Elem Uea::normal(const Mono& w) const
{
    size_t i = 0;
    while (i + 1 < w.size() && w[i] <= w[i + 1]) ++i;
    if (i + 1 >= w.size()) return {{w, Rat(1)}};
    if (auto it = cache_.find(w); it != cache_.end()) return it->second;

    Elem out;
    Mono swapped = w;
    std::swap(swapped[i], swapped[i + 1]);
    add_to(out, normal(swapped));
    for (int k = 0; k < n_; ++k) {
        const Rat& c = C(w[i], w[i + 1], k);
        if (c == 0) continue;
        Mono shorter(w.begin(), w.begin() + i);
        shorter.push_back(k);
        shorter.insert(shorter.end(), w.begin() + i + 2, w.end());
        add_to(out, normal(shorter), c);
    }
    cache_[w] = out;
    return out;
}

Uea::Elem Uea::multiply(const Elem& a, const Elem& b) const
{
    Elem out;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Mono w = ma;
            w.insert(w.end(), mb.begin(), mb.end());
            add_to(out, normal(w), ca * cb);
        }
    return out;
}

Uea::Elem Uea::commutator(const Elem& a, const Elem& b) const
{
    Elem out = multiply(a, b);
    add_to(out, multiply(b, a), -1);
    return out;
}

} // namespace lpf
