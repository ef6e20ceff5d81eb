#include "lpf/kontsevich.hpp"

#include "lpf/atiyah_todd.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lpf {

namespace {

int inversion_sign(const std::vector<int>& v)
{
    int inv = 0;
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            if (v[i] > v[j]) ++inv;
    return inv % 2 ? -1 : 1;
}

std::vector<int> bits(std::uint32_t m)
{
    std::vector<int> out;
    for (int i = 0; m; ++i, m >>= 1)
        if (m & 1) out.push_back(i);
    return out;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

double det(std::vector<double> a, int n)
{
    double d = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
        if (a[p * n + c] == 0.0) return 0.0;
        if (p != c) {
            for (int k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
            d = -d;
        }
        d *= a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] / a[c * n + c];
            for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return d;
}

// d^J on Chi with the falling-factorial coefficient; false when it vanishes
bool derive_word(const Word& w, const Exps& J, Word& out, Rat& factor)
{
    out = w;
    factor = 1;
    for (int i = 0; i < kMaxEven; ++i) {
        if (w.chi[i] < J[i]) return false;
        for (int k = 0; k < J[i]; ++k) factor *= w.chi[i] - k;
        out.chi[i] = static_cast<std::uint8_t>(w.chi[i] - J[i]);
    }
    return true;
}

void erase_if_zero(NumericOp& op, const std::pair<std::vector<Exps>, Word>& key)
{
    auto it = op.terms.find(key);
    if (it != op.terms.end() && it->second.exact == 0 && it->second.mc == 0.0 && it->second.var == 0.0)
        op.terms.erase(it);
}

void add_into(NumericPoly& p, const Word& w, const NumCoef& c)
{
    auto& e = p[w];
    e.exact += c.exact;
    e.mc += c.mc;
    e.var += c.var;
    if (e.exact == 0 && e.mc == 0.0 && e.var == 0.0) p.erase(w);
}

NumericPoly poly_mul(const NumericPoly& a, const NumericPoly& b)
{
    NumericPoly out;
    for (const auto& [wa, ca] : a)
        for (const auto& [wb, cb] : b) {
            Word w;
            int sign = 1;
            if (!word_product(wa, wb, w, sign)) continue;
            NumCoef c = num_mul(ca, cb);
            if (sign < 0) {
                c.exact = -c.exact;
                c.mc = -c.mc;
            }
            add_into(out, w, c);
        }
    return out;
}

NumericPoly poly_derive(const NumericPoly& a, const Exps& J)
{
    NumericPoly out;
    for (const auto& [w, c] : a) {
        Word v;
        Rat f;
        if (!derive_word(w, J, v, f)) continue;
        add_into(out, v, num_mul(c, NumCoef{f, 0.0, 0.0}));
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// graphs

int AdmissibleGraph::edge_count() const
{
    int e = 0;
    for (const auto& o : out) e += static_cast<int>(o.size());
    return e;
}

std::vector<std::pair<int, int>> AdmissibleGraph::in_edges(int v) const
{
    std::vector<std::pair<int, int>> r;
    for (int k = 0; k < n; ++k)
        for (int p = 0; p < star(k); ++p)
            if (out[k][p] == v) r.emplace_back(k, p);
    return r;
}

bool AdmissibleGraph::admissible() const
{
    if (n < 1 || m < 0 || static_cast<int>(out.size()) != n) return false;
    for (int k = 0; k < n; ++k) {
        std::vector<int> t = out[k];
        for (int v : t)
            if (v == k || v < 0 || v >= n + m) return false;
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) != t.end()) return false;
    }
    return true;
}

std::string AdmissibleGraph::key() const
{
    std::ostringstream os;
    os << n << " " << m << "|";
    for (int k = 0; k < n; ++k) {
        if (k) os << ";";
        for (size_t p = 0; p < out[k].size(); ++p) os << (p ? "," : "") << out[k][p];
    }
    return os.str();
}

AdmissibleGraph AdmissibleGraph::parse(const std::string& key)
{
    AdmissibleGraph g;
    auto bar = key.find('|');
    if (bar == std::string::npos) throw std::invalid_argument("graph key: missing '|'");
    std::istringstream head(key.substr(0, bar));
    if (!(head >> g.n >> g.m)) throw std::invalid_argument("graph key: bad header");
    g.out.assign(g.n, {});
    std::string body = key.substr(bar + 1);
    int k = 0;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) g.out.at(k).push_back(std::stoi(cur));
        cur.clear();
    };
    for (char ch : body) {
        if (ch == ',') flush();
        else if (ch == ';') {
            flush();
            ++k;
        } else cur += ch;
    }
    flush();
    if (!g.admissible()) throw std::invalid_argument("graph key: not admissible");
    return g;
}

std::vector<AdmissibleGraph> enumerate_graphs_with_stars(int m, const std::vector<int>& stars)
{
    const int n = static_cast<int>(stars.size());
    std::vector<AdmissibleGraph> out;
    if (n < 1 || m < 0) throw std::invalid_argument("enumerate_graphs: need n >= 1, m >= 0");
    for (int s : stars)
        if (s < 0 || s > n + m - 1) return out;
    AdmissibleGraph g;
    g.n = n;
    g.m = m;
    g.out.assign(n, {});
    std::function<void(int)> rec = [&](int k) {
        if (k == n) {
            out.push_back(g);
            return;
        }
        if (static_cast<int>(g.out[k].size()) == stars[k]) {
            rec(k + 1);
            return;
        }
        for (int v = 0; v < n + m; ++v) {
            if (v == k || std::find(g.out[k].begin(), g.out[k].end(), v) != g.out[k].end()) continue;
            g.out[k].push_back(v);
            rec(k);
            g.out[k].pop_back();
        }
    };
    rec(0);
    return out;
}

std::vector<AdmissibleGraph> enumerate_graphs(int n, int m, int edge_count)
{
    if (n < 1 || m < 0) throw std::invalid_argument("enumerate_graphs: need n >= 1, m >= 0");
    std::vector<AdmissibleGraph> out;
    std::vector<int> stars(n, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == n - 1) {
            if (left > n + m - 1) return;
            stars[k] = left;
            auto part = enumerate_graphs_with_stars(m, stars);
            out.insert(out.end(), part.begin(), part.end());
            return;
        }
        for (int s = 0; s <= std::min(left, n + m - 1); ++s) {
            stars[k] = s;
            rec(k + 1, left - s);
        }
    };
    if (edge_count >= 0) rec(0, edge_count);
    return out;
}

// ---------------------------------------------------------------------------
// assembly

VDiffOp assemble(const AdmissibleGraph& g, const std::vector<GradedElement>& gammas, int d)
{
    if (static_cast<int>(gammas.size()) != g.n) throw std::invalid_argument("assemble: arity mismatch");
    if (d < 0 || d > kMaxEven) throw std::invalid_argument("assemble: dimension out of range");
    const int n = g.n;
    int trunc = -1;
    for (const auto& x : gammas)
        if (x.trunc >= 0) trunc = trunc < 0 ? x.trunc : std::min(trunc, x.trunc);
    VDiffOp out;
    out.trunc = trunc;

    // components gamma^{(i_1..i_s)} with the alternation sign; parity flips for the Koszul rule
    std::vector<std::map<std::vector<int>, GradedElement>> comp(n);
    int slots_before = 0;
    for (int k = 0; k < n; ++k) {
        const int s = g.star(k);
        const bool flip = slots_before % 2 == 1;
        for (const auto& [w, c] : gammas[k].terms) {
            if (w.th) throw std::invalid_argument("assemble: fibre forms are not polyvectors");
            if (std::popcount(w.eps) != s) continue;
            std::vector<int> e = bits(w.eps);
            if (!e.empty() && e.back() >= d) throw std::invalid_argument("assemble: slot index beyond dimension");
            Word f = w;
            f.eps = 0;
            std::vector<int> perm = e;
            do {
                auto& slot = comp[k][perm];
                if (slot.trunc != gammas[k].trunc) slot.trunc = gammas[k].trunc;
                Rat v = inversion_sign(perm) * c;
                if (flip && std::popcount(f.lam) % 2) v = -v;
                slot.add_term(f, v);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        if (comp[k].empty()) return out;
        slots_before += s;
    }

    struct Edge {
        int src, target;
    };
    std::vector<Edge> edges;
    for (int k = 0; k < n; ++k)
        for (int t : g.out[k]) edges.push_back({k, t});
    const int E = static_cast<int>(edges.size());
    std::vector<int> I(E, 0);
    while (true) {
        GradedElement prod = GradedElement::one(trunc);
        bool alive = true;
        std::vector<std::vector<int>> tuple(n);
        std::vector<Exps> in(n + g.m, Exps{});
        for (int e = 0; e < E; ++e) {
            tuple[edges[e].src].push_back(I[e]);
            in[edges[e].target][I[e]]++;
        }
        for (int k = 0; k < n && alive; ++k) {
            auto it = comp[k].find(tuple[k]);
            if (it == comp[k].end()) {
                alive = false;
                break;
            }
            GradedElement f = chi_derivative(in[k], it->second);
            if (f.is_zero()) {
                alive = false;
                break;
            }
            prod = prod * f;
            if (prod.is_zero()) alive = false;
        }
        if (alive) {
            std::vector<Exps> key(in.begin() + n, in.end());
            out.add(key, prod);
        }
        int e = 0;
        while (e < E && ++I[e] == d) I[e++] = 0;
        if (e == E) break;
    }
    return out;
}

VDiffOp assemble_weighted(const std::vector<std::pair<AdmissibleGraph, Rat>>& graphs,
                          const std::vector<GradedElement>& gammas, int d)
{
    VDiffOp out;
    for (const auto& [g, w] : graphs) {
        if (w == 0) continue;
        out += w * assemble(g, gammas, d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// weights

GraphWeight monte_carlo_weight(const AdmissibleGraph& g, long samples, std::uint64_t seed)
{
    const int n = g.n, m = g.m;
    const int dims = 2 * (n - 1) + m;
    if (g.edge_count() != dims) {
        GraphWeight w;
        w.exact = 0;
        return w;
    }
    if (samples < 2) throw std::invalid_argument("monte_carlo_weight: need at least 2 samples");
    GraphWeight w;
    w.source = WeightSource::MonteCarlo;
    w.seed = seed;
    w.samples = samples;
    double prefactor = 1.0;
    for (int k = 0; k < n; ++k)
        for (int j = 2; j <= g.star(k); ++j) prefactor /= j;
    if (dims == 0) {
        w.value = prefactor;
        return w;
    }

    const std::uint64_t h = fnv1a(g.key());
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double pi = std::numbers::pi;
    double mfact = 1.0;
    for (int j = 2; j <= m; ++j) mfact *= j;

    struct Edge {
        int s, t;
    };
    std::vector<Edge> edges;
    for (int k = 0; k < n; ++k)
        for (int t : g.out[k]) edges.push_back({k, t});

    // first two terrestrial targets of each aerial vertex, if any: the angle proposal
    // draws (arg(z - p_a), arg(z - p_b)) uniformly on 0 < theta_a < theta_b < pi
    std::vector<std::pair<int, int>> ground_pair(n, {-1, -1});
    for (int k = 1; k < n; ++k) {
        std::vector<int> t;
        for (int v : g.out[k])
            if (v >= n) t.push_back(v);
        std::sort(t.begin(), t.end());
        if (t.size() >= 2) ground_pair[k] = {t[0], t[1]};
    }

    std::vector<std::complex<double>> z(n + m);
    std::vector<double> jac(static_cast<size_t>(dims) * dims);
    std::vector<double> q(m);
    std::vector<std::complex<double>> placed;
    constexpr double kTail = 0.4, kNear = 1.0, kAngle = 0.7;
    double mean = 0.0, m2 = 0.0;
    for (long it = 1; it <= samples; ++it) {
        // terrestrial points: sorted Cauchy(0, 2) draws; aerial points: mixture of a
        // heavy-tailed density on H, 1/r densities around every placed point and, for
        // vertices with two terrestrial targets, the angle proposal
        double pdf = mfact;
        for (int l = 0; l < m; ++l) {
            q[l] = 2.0 * std::tan(pi * (U(rng) - 0.5));
            pdf *= 2.0 / (pi * (4.0 + q[l] * q[l]));
        }
        std::sort(q.begin(), q.end());
        for (int l = 0; l < m; ++l) z[n + l] = {q[l], 0.0};
        z[0] = {0.0, 1.0};
        bool inside = true;
        for (int k = 1; k < n; ++k) {
            placed.clear();
            for (int j = 0; j < k; ++j) placed.push_back(z[j]);
            for (int l = 0; l < m; ++l) placed.push_back(z[n + l]);
            const bool angle = ground_pair[k].first >= 0;
            const double rest = angle ? 1.0 - kAngle : 1.0;
            const double tail_w = rest * kTail;
            const double near_w = rest * (1.0 - kTail) / static_cast<double>(placed.size());
            const double pa = angle ? z[ground_pair[k].first].real() : 0.0;
            const double pb = angle ? z[ground_pair[k].second].real() : 0.0;
            const double choice = U(rng);
            if (angle && choice < kAngle) {
                double ta = pi * U(rng), tb = pi * U(rng);
                if (ta > tb) std::swap(ta, tb);
                const double s = (pb - pa) * std::sin(tb) / std::sin(tb - ta);
                z[k] = pa + std::polar(s, ta);
            } else if (choice < (angle ? kAngle : 0.0) + tail_w) {
                const double u = U(rng);
                const double R = std::sqrt(1.0 / ((1.0 - u) * (1.0 - u)) - 1.0);
                z[k] = std::polar(R, pi * U(rng));
            } else {
                const auto c = placed[std::min(placed.size() - 1, static_cast<size_t>(U(rng) * placed.size()))];
                z[k] = c + std::polar(kNear * U(rng), 2 * pi * U(rng));
            }
            if (!(z[k].imag() > 0.0) || !std::isfinite(z[k].real())) {
                inside = false;
                break;
            }
            double dens = tail_w / (pi * std::pow(1.0 + std::norm(z[k]), 1.5));
            for (const auto& c : placed) {
                const double r = std::abs(z[k] - c);
                if (r < kNear) dens += near_w / (2 * pi * kNear * r);
            }
            if (angle) {
                const double y = z[k].imag();
                const double ra = std::norm(z[k] - pa), rb = std::norm(z[k] - pb);
                dens += kAngle * 2.0 / (pi * pi) * y * (pb - pa) / (ra * rb);
            }
            pdf *= dens;
        }
        if (!inside) {
            const double delta = -mean;
            mean += delta / it;
            m2 += delta * (0.0 - mean);
            continue;
        }

        std::fill(jac.begin(), jac.end(), 0.0);
        for (int e = 0; e < dims; ++e) {
            const auto zs = z[edges[e].s], zt = z[edges[e].t];
            const auto A = 1.0 / (zs - zt);
            const auto B = 1.0 / (std::conj(zs) - zt);
            const double c = 1.0 / (2 * pi);
            double* row = &jac[static_cast<size_t>(e) * dims];
            const int s = edges[e].s, t = edges[e].t;
            if (s > 0) {
                row[2 * (s - 1)] += c * (A.imag() - B.imag());
                row[2 * (s - 1) + 1] += c * (A.real() + B.real());
            }
            if (t >= n) {
                row[2 * (n - 1) + (t - n)] += c * (B.imag() - A.imag());
            } else if (t > 0) {
                row[2 * (t - 1)] += c * (B.imag() - A.imag());
                row[2 * (t - 1) + 1] += c * (B.real() - A.real());
            }
        }
        const double v = det(jac, dims) / pdf;
        const double delta = v - mean;
        mean += delta / it;
        m2 += delta * (v - mean);
    }
    w.value = prefactor * mean;
    w.stderr_ = prefactor * std::sqrt(m2 / (samples - 1) / samples);
    return w;
}

GraphWeight weight(const AdmissibleGraph& g, const WeightMode& mode)
{
    GraphWeight w;
    if (g.edge_count() != 2 * g.n + g.m - 2) {
        w.exact = 0;
        return w;
    }
    if (!mode.monte_carlo && g.n == 1) {
        std::vector<int> t = g.out[0];
        for (int& v : t) v -= 1;
        w.exact = Rat(inversion_sign(t)) / (factorial(g.m) * factorial(g.m));
        w.value = w.exact.convert_to<double>();
        return w;
    }
    return monte_carlo_weight(g, mode.samples, mode.seed);
}

std::string WeightCache::cache_key(const AdmissibleGraph& g, const WeightMode& mode)
{
    std::ostringstream os;
    os << g.key() << "#" << (mode.monte_carlo ? 1 : 0) << ":" << mode.seed << ":" << mode.samples;
    return os.str();
}

std::optional<GraphWeight> WeightCache::find(const AdmissibleGraph& g, const WeightMode& mode) const
{
    auto it = entries_.find(cache_key(g, mode));
    if (it == entries_.end()) return std::nullopt;
    return it->second.second;
}

void WeightCache::insert(const AdmissibleGraph& g, const WeightMode& mode, const GraphWeight& w)
{
    entries_[cache_key(g, mode)] = {g, w};
}

void WeightCache::save(std::ostream& out) const
{
    out.precision(17);
    for (const auto& [k, e] : entries_) {
        const auto& [g, w] = e;
        const auto mode_part = k.substr(k.find('#') + 1);
        out << "graph " << g.key() << " mode " << mode_part << " " << (w.is_exact() ? "closed" : "mc") << " "
            << to_pq(w.exact) << " " << w.value << " " << w.stderr_ << " " << w.seed << " " << w.samples << "\n";
    }
}

void WeightCache::load(std::istream& in)
{
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        // graph <n> <m|edges> mode <mc:seed:samples> <source> <exact> <value> <stderr> <seed> <samples>
        std::istringstream is(line);
        std::string tag, n, rest, mode_tag, mode_part, src, exact;
        GraphWeight w;
        if (!(is >> tag >> n >> rest >> mode_tag >> mode_part >> src >> exact >> w.value >> w.stderr_ >> w.seed >>
              w.samples) ||
            tag != "graph" || mode_tag != "mode")
            throw std::invalid_argument("weight cache: malformed line: " + line);
        AdmissibleGraph g = AdmissibleGraph::parse(n + " " + rest);
        w.source = src == "closed" ? WeightSource::ClosedForm : WeightSource::MonteCarlo;
        w.exact = parse_rat(exact);
        entries_[g.key() + "#" + mode_part] = {g, w};
    }
}

// ---------------------------------------------------------------------------
// numeric operators

double NumCoef::value() const { return exact.convert_to<double>() + mc; }
double NumCoef::error() const { return std::sqrt(var); }

NumCoef num_mul(const NumCoef& a, const NumCoef& b)
{
    NumCoef c;
    c.exact = a.exact * b.exact;
    const double ae = a.exact.convert_to<double>(), be = b.exact.convert_to<double>();
    c.mc = ae * b.mc + a.mc * be + a.mc * b.mc;
    c.var = a.value() * a.value() * b.var + b.value() * b.value() * a.var;
    return c;
}

void NumericOp::add(const VDiffOp& op, const GraphWeight& w, const Rat& scale)
{
    for (const auto& [key, coef] : op.terms)
        for (const auto& [word, c] : coef.terms) {
            auto k = std::make_pair(key, word);
            auto& e = terms[k];
            if (w.is_exact()) {
                e.exact += c * w.exact * scale;
            } else {
                const double cd = (c * scale).convert_to<double>();
                e.mc += cd * w.value;
                e.var += (cd * w.stderr_) * (cd * w.stderr_);
            }
            erase_if_zero(*this, k);
        }
}

void NumericOp::add(const NumericOp& o, const Rat& scale)
{
    const double sd = scale.convert_to<double>();
    for (const auto& [k, c] : o.terms) {
        auto& e = terms[k];
        e.exact += c.exact * scale;
        e.mc += c.mc * sd;
        e.var += c.var * sd * sd;
        erase_if_zero(*this, k);
    }
}

bool NumericOp::exact_only() const
{
    return std::all_of(terms.begin(), terms.end(), [](const auto& kv) { return kv.second.mc == 0.0 && kv.second.var == 0.0; });
}

VDiffOp NumericOp::exact() const
{
    VDiffOp out;
    for (const auto& [k, c] : terms)
        if (c.exact != 0) out.add(k.first, GradedElement::monomial(k.second, c.exact));
    return out;
}

std::string NumericOp::str() const
{
    std::ostringstream os;
    os.precision(6);
    bool first = true;
    for (const auto& [k, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.value() << " +- " << c.error() << ")" << GradedElement::monomial(k.second, 1).str() << "[";
        for (size_t i = 0; i < k.first.size(); ++i) {
            if (i) os << "|";
            for (int j = 0; j < kMaxEven; ++j)
                for (int e = 0; e < k.first[i][j]; ++e) os << "d" << j;
        }
        os << "]";
    }
    return first ? "0" : os.str();
}

NumericOp below(const NumericOp& a, int N)
{
    NumericOp out;
    for (const auto& [k, c] : a.terms)
        if (k.second.sdeg() < N) out.terms.emplace(k, c);
    return out;
}

VDiffOp below(const VDiffOp& a, int N)
{
    VDiffOp out;
    out.trunc = a.trunc;
    for (const auto& [k, c] : a.terms) out.add(k, below(c, N));
    return out;
}

NumericPoly to_numeric(const GradedElement& f)
{
    NumericPoly p;
    for (const auto& [w, c] : f.terms) p[w] = NumCoef{c, 0.0, 0.0};
    return p;
}

NumericPoly apply(const NumericOp& op, const std::vector<NumericPoly>& args)
{
    NumericPoly out;
    for (const auto& [k, c] : op.terms) {
        if (k.first.size() != args.size()) throw std::invalid_argument("apply: operator arity mismatch");
        NumericPoly acc;
        acc[k.second] = c;
        for (size_t i = 0; i < args.size() && !acc.empty(); ++i) acc = poly_mul(acc, poly_derive(args[i], k.first[i]));
        for (const auto& [w, v] : acc) add_into(out, w, v);
    }
    return out;
}


Discrepancy compare(const NumericOp& a, const VDiffOp& b)
{
    NumericOp diff = a;
    NumericOp nb;
    GraphWeight one;
    one.exact = 1;
    nb.add(b, one);
    diff.add(nb, -1);
    Discrepancy d;
    for (const auto& [k, c] : diff.terms) {
        const double v = std::abs(c.value()), e = c.error();
        d.max_error = std::max(d.max_error, e);
        d.max_abs = std::max(d.max_abs, v);
        double s = e > 0 ? v / e : (v > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
        d.max_sigmas = std::max(d.max_sigmas, s);
    }
    return d;
}

Discrepancy compare(const NumericPoly& a, const NumericPoly& b)
{
    NumericPoly diff = a;
    for (const auto& [w, c] : b) add_into(diff, w, NumCoef{-c.exact, -c.mc, c.var});
    Discrepancy d;
    for (const auto& [w, c] : diff) {
        const double v = std::abs(c.value()), e = c.error();
        d.max_error = std::max(d.max_error, e);
        d.max_abs = std::max(d.max_abs, v);
        double s = e > 0 ? v / e : (v > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
        d.max_sigmas = std::max(d.max_sigmas, s);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Taylor coefficients

TaylorResult taylor_U(const std::vector<GradedElement>& gammas, int d, const TaylorOptions& opt)
{
    const int n = static_cast<int>(gammas.size());
    if (n < 1) throw std::invalid_argument("taylor_U: need at least one input");
    TaylorResult res;
    // split inputs by the number of slots
    std::vector<std::map<int, GradedElement>> parts(n);
    for (int k = 0; k < n; ++k)
        for (const auto& [w, c] : gammas[k].terms) {
            auto& p = parts[k][std::popcount(w.eps)];
            p.trunc = gammas[k].trunc;
            p.add_term(w, c);
        }
    for (const auto& p : parts)
        if (p.empty()) return res;

    struct Job {
        AdmissibleGraph g;
        VDiffOp U;
        GraphWeight w;
        bool cached = false;
    };
    std::vector<Job> jobs;
    std::vector<int> stars(n);
    std::vector<const GradedElement*> chosen(n);
    std::function<void(int)> rec = [&](int k) {
        if (k == n) {
            int E = 0;
            for (int s : stars) E += s;
            const int m = E - 2 * n + 2;
            if (m < 0) return;
            std::vector<GradedElement> in;
            for (auto* p : chosen) in.push_back(*p);
            for (auto& g : enumerate_graphs_with_stars(m, stars)) {
                if (++res.graphs > opt.max_graphs) throw std::length_error("taylor_U: weight budget exhausted");
                VDiffOp U = assemble(g, in, d);
                if (U.is_zero()) continue;
                jobs.push_back({std::move(g), std::move(U), {}, false});
            }
            return;
        }
        for (const auto& [s, p] : parts[k]) {
            stars[k] = s;
            chosen[k] = &p;
            rec(k + 1);
        }
    };
    rec(0);

    for (auto& j : jobs)
        if (opt.cache)
            if (auto w = opt.cache->find(j.g, opt.mode)) {
                j.w = *w;
                j.cached = true;
            }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < jobs.size();)
            if (!jobs[i].cached) jobs[i].w = weight(jobs[i].g, opt.mode);
    };
    const unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < hw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (auto& j : jobs) {
        if (opt.cache && !j.cached) opt.cache->insert(j.g, opt.mode, j.w);
        if (j.w.is_exact() && j.w.exact == 0) continue;
        ++res.weighted;
        if (!j.w.is_exact()) ++res.monte_carlo;
        res.op.add(j.U, j.w);
    }
    return res;
}

// ---------------------------------------------------------------------------
// star products

StarProduct star_product(const GradedElement& pi, int d, int order, const TaylorOptions& opt, bool allow_order3)
{
    if (order < 0 || order > 3 || (order == 3 && !allow_order3))
        throw std::invalid_argument("star_product: order must be <= 2 (3 with the budget flag)");
    for (const auto& [w, c] : pi.terms)
        if (std::popcount(w.eps) != 2 || w.lam || w.th)
            throw std::invalid_argument("star_product: pi must be a bivector field");
    if (!schouten(vertical_schouten(0, d), pi, pi).is_zero())
        throw std::invalid_argument("star_product: pi is not Poisson");
    StarProduct s;
    s.d = d;
    s.order = order;
    NumericOp m0;
    GraphWeight one;
    one.exact = 1;
    m0.add(multiplication_op(pi.trunc), one);
    s.coefficients.push_back(m0);
    for (int n = 1; n <= order; ++n) {
        auto r = taylor_U(std::vector<GradedElement>(n, pi), d, opt);
        s.graphs += r.graphs;
        NumericOp c;
        c.add(r.op, 1 / factorial(n));
        s.coefficients.push_back(c);
    }
    return s;
}

std::vector<NumericPoly> star_apply(const StarProduct& s, const std::vector<NumericPoly>& f,
                                    const std::vector<NumericPoly>& g)
{
    std::vector<NumericPoly> out(s.order + 1);
    for (size_t a = 0; a < f.size(); ++a)
        for (size_t b = 0; b < g.size(); ++b)
            for (int n = 0; n <= s.order; ++n) {
                const size_t p = a + b + n;
                if (p > static_cast<size_t>(s.order)) continue;
                for (const auto& [w, c] : apply(s.coefficients[n], {f[a], g[b]})) add_into(out[p], w, c);
            }
    return out;
}

// ---------------------------------------------------------------------------
// fibrewise formality

GradedElement fedosov_omega(const FedosovData& F)
{
    const int r = F.spec.r();
    GradedElement omega(F.N);
    for (int k = 0; k < r; ++k) {
        GradedElement f(F.N);
        if (F.Q.chi[k]) f += *F.Q.chi[k];
        if (F.dnabla.chi[k]) f -= *F.dnabla.chi[k];
        omega += f * GradedElement::gen({Gen::Eps, k}, F.N);
    }
    return omega;
}

TaylorResult phi_n(const FedosovData& F, const std::vector<GradedElement>& gammas, const TaylorOptions& opt)
{
    if (F.N < 3) throw std::invalid_argument("phi_n: truncation N >= 3 required");
    const int n = static_cast<int>(gammas.size());
    const int d = F.spec.r();
    int slots = 0;
    for (const auto& g : gammas) {
        int s = 0;
        for (const auto& kv : g.terms) s = std::max(s, std::popcount(kv.first.eps));
        slots += s;
    }
    const GradedElement omega = fedosov_omega(F);
    TaylorResult res;
    // U_{n+j} lands in degree sum(s_k - 1) + 1 - (n + j) >= -1
    for (int j = 0; j <= slots + 2 - 2 * n; ++j) {
        std::vector<GradedElement> in(j, omega);
        in.insert(in.end(), gammas.begin(), gammas.end());
        auto r = taylor_U(in, d, opt);
        res.graphs += r.graphs;
        res.weighted += r.weighted;
        res.monte_carlo += r.monte_carlo;
        res.op.add(r.op, 1 / factorial(j));
    }
    return res;
}

VDiffOp hkr_sqrt_ttodd(const FedosovData& F, const GradedElement& gamma)
{
    auto M = atiyah_cocycle_fedosov(F);
    auto T = todd_cocycle(M, ToddKind::SqrtTTodd, F.spec.r()).total();
    return vertical_hkr(contract_by(T, gamma));
}

} // namespace lpf
