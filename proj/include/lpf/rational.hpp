#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>

namespace lpf {

using Rat = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                          boost::multiprecision::et_off>;

inline Rat rat(long long p, long long q = 1) { return Rat(p) / Rat(q); }

// always "p/q", also for integers, so reports parse back uniformly
inline std::string to_pq(const Rat& r)
{
    return boost::multiprecision::numerator(r).str() + "/" +
           boost::multiprecision::denominator(r).str();
}

Rat parse_rat(const std::string& s);

inline Rat factorial(int n)
{
    Rat f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline Rat binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

} // namespace lpf
