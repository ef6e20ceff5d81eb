#pragma once

#include "lpf/fedosov.hpp"
#include "lpf/graded.hpp"
#include "lpf/poly_complexes.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lpf {

// Vertices 0..n-1 are aerial, n..n+m-1 terrestrial. out[k] lists the targets of the
// edges e_k^1, e_k^2, ... of aerial vertex k in order; edges are ordered lexicographically.
struct AdmissibleGraph {
    int n = 0, m = 0;
    std::vector<std::vector<int>> out;

    int edge_count() const;
    int star(int k) const { return static_cast<int>(out[k].size()); }
    // in-edges of a vertex as (source, position) in lexicographic order
    std::vector<std::pair<int, int>> in_edges(int v) const;
    bool admissible() const;
    std::string key() const; // "n m|t,t;t;..."
    static AdmissibleGraph parse(const std::string& key);
    auto operator<=>(const AdmissibleGraph&) const = default;
    bool operator==(const AdmissibleGraph&) const = default;
};

std::vector<AdmissibleGraph> enumerate_graphs(int n, int m, int edge_count);
// graphs with prescribed out-degrees
std::vector<AdmissibleGraph> enumerate_graphs_with_stars(int m, const std::vector<int>& stars);

// Polyvector fields on K^d are words lam^I eps^J chi^K: Chi are the coordinates, Eps_j
// the slot d/dchi_j, Lam a constant odd coefficient. The result acts on functions of Chi.
// Odd coefficients are pulled out with the Koszul sign of moving c_k past the slots
// of g_1..g_{k-1} (each Eps odd, as in the word algebra).
VDiffOp assemble(const AdmissibleGraph& g, const std::vector<GradedElement>& gammas, int d);

enum class WeightSource { ClosedForm, MonteCarlo };

struct GraphWeight {
    WeightSource source = WeightSource::ClosedForm;
    Rat exact;               // closed form
    double value = 0.0;      // estimate (equals exact for closed forms)
    double stderr_ = 0.0;
    std::uint64_t seed = 0;
    long samples = 0;
    bool is_exact() const { return source == WeightSource::ClosedForm; }
};

struct WeightMode {
    bool monte_carlo = false; // force sampling even when a closed form is known
    long samples = 100000;
    std::uint64_t seed = 1;
};

// closed forms: 0 when |E| != 2n + m - 2; n = 1: sign(edge order)/(m!)^2.
// Otherwise the gauge-fixed (z_1 = i) integral of the angle forms by importance sampling.
GraphWeight weight(const AdmissibleGraph& g, const WeightMode& mode);
GraphWeight monte_carlo_weight(const AdmissibleGraph& g, long samples, std::uint64_t seed);

// line cache: "graph <key> <closed|mc> <exact p/q> <value> <stderr> <seed> <samples>"
class WeightCache {
public:
    std::optional<GraphWeight> find(const AdmissibleGraph& g, const WeightMode& mode) const;
    void insert(const AdmissibleGraph& g, const WeightMode& mode, const GraphWeight& w);
    void load(std::istream& in);
    void save(std::ostream& out) const;
    size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::pair<AdmissibleGraph, GraphWeight>> entries_;
    static std::string cache_key(const AdmissibleGraph& g, const WeightMode& mode);
};

// exact part plus a Monte-Carlo part with its variance
struct NumCoef {
    Rat exact;
    double mc = 0.0;
    double var = 0.0;
    double value() const;
    double error() const;
};
NumCoef num_mul(const NumCoef& a, const NumCoef& b);

// polydifferential operator on Chi with numeric coefficients; key (slots, coefficient word)
struct NumericOp {
    std::map<std::pair<std::vector<Exps>, Word>, NumCoef> terms;
    void add(const VDiffOp& op, const GraphWeight& w, const Rat& scale = 1);
    void add(const NumericOp& o, const Rat& scale = 1);
    bool exact_only() const;
    VDiffOp exact() const; // drops the numeric parts
    std::string str() const;
};

// numeric function of Chi (and coefficients)
using NumericPoly = std::map<Word, NumCoef>;
NumericPoly to_numeric(const GradedElement& f);
NumericPoly apply(const NumericOp& op, const std::vector<NumericPoly>& args);

// keeps coefficient words of symmetric degree < N
NumericOp below(const NumericOp& a, int N);
VDiffOp below(const VDiffOp& a, int N);

struct Discrepancy {
    double max_abs = 0.0;   // max |a - b| over coefficients
    double max_error = 0.0; // propagated standard error at that coefficient
    double max_sigmas = 0.0;
};
Discrepancy compare(const NumericOp& a, const VDiffOp& b);
Discrepancy compare(const NumericPoly& a, const NumericPoly& b);

struct TaylorOptions {
    WeightMode mode;
    long max_graphs = 100000; // weight budget
    WeightCache* cache = nullptr;
};

struct TaylorResult {
    NumericOp op;
    long graphs = 0;         // graphs enumerated
    long weighted = 0;       // graphs with nonzero U_Gamma whose weight was used
    long monte_carlo = 0;
};

// U_n(gamma_1..gamma_n) = sum_m sum_Gamma W_Gamma U_Gamma; throws std::length_error on budget
TaylorResult taylor_U(const std::vector<GradedElement>& gammas, int d, const TaylorOptions& opt);

// sum_Gamma W_Gamma U_Gamma with caller-supplied weights (homotopy skeleton)
VDiffOp assemble_weighted(const std::vector<std::pair<AdmissibleGraph, Rat>>& graphs,
                          const std::vector<GradedElement>& gammas, int d);

// f * g = sum_{n <= order} hbar^n / n! U_n(pi, ..., pi)(f, g); index = power of hbar
struct StarProduct {
    int d = 0, order = 0;
    std::vector<NumericOp> coefficients;
    long graphs = 0;
};
// throws std::invalid_argument unless [pi, pi] = 0; order 3 needs allow_order3
StarProduct star_product(const GradedElement& pi, int d, int order, const TaylorOptions& opt,
                         bool allow_order3 = false);
std::vector<NumericPoly> star_apply(const StarProduct& s, const std::vector<NumericPoly>& f,
                                    const std::vector<NumericPoly>& g);

// omega = Q - d^nabla as a vertical vector field sum_k omega_k Eps_k
GradedElement fedosov_omega(const FedosovData& F);
// Phi_n(gamma) = sum_{j >= 0} 1/j! U_{n+j}(omega^j, gamma) on the fibre coordinates
TaylorResult phi_n(const FedosovData& F, const std::vector<GradedElement>& gammas, const TaylorOptions& opt);
// hkr((ttodd^can)^{1/2} contracted into gamma); needs N >= 3
VDiffOp hkr_sqrt_ttodd(const FedosovData& F, const GradedElement& gamma);

} // namespace lpf
