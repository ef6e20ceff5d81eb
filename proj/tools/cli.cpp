#include "cli.hpp"

#include "lpf/atiyah_todd.hpp"
#include "lpf/duflo.hpp"
#include "lpf/fedosov.hpp"
#include "lpf/kontsevich.hpp"
#include "lpf/poly_complexes.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lpf::cli {

using nlohmann::json;

namespace {

// pinned tolerances for sampled comparisons
constexpr double kAssociativityTolerance = 1e-2;
constexpr double kAssociativitySigmaLimit = 4.0;
constexpr double kPhiAbsTolerance = 1e-2;
constexpr double kPhiSigmaLimit = 5.0;

struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string status_name(int code)
{
    switch (code) {
    case kOk: return "ok";
    case kParseFailure: return "parse_failure";
    case kValidationFailure: return "validation_failure";
    case kPreconditionFailure: return "precondition_failure";
    default: return "invariant_violation";
    }
}

json numeric(double value, double error)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.8g ± %.2g", value, error);
    return {{"value", value}, {"stderr", error}, {"display", buf}};
}

std::string word_str(const Word& w)
{
    std::string s = GradedElement::monomial(w, 1).str();
    return s == "1/1" ? "1" : s.substr(4);
}

json exps_json(const Exps& e, int n)
{
    json a = json::array();
    for (int i = 0; i < n; ++i) a.push_back(static_cast<int>(e[i]));
    return a;
}

json coef_json(const NumCoef& c)
{
    return {{"exact_part", to_pq(c.exact)}, {"estimate", numeric(c.value(), c.error())}};
}

json numeric_op_json(const NumericOp& op, int d)
{
    json terms = json::array();
    for (const auto& [key, c] : op.terms) {
        json slots = json::array();
        for (const auto& e : key.first) slots.push_back(exps_json(e, d));
        json t = coef_json(c);
        t["slots"] = slots;
        t["coefficient"] = word_str(key.second);
        terms.push_back(t);
    }
    return terms;
}

json numeric_poly_json(const NumericPoly& p)
{
    json terms = json::array();
    for (const auto& [w, c] : p) {
        json t = coef_json(c);
        t["monomial"] = word_str(w);
        terms.push_back(t);
    }
    return terms;
}

json field_json(const VField& f)
{
    json a = json::array();
    for (const auto& c : f) a.push_back(c.str());
    return a;
}

json matrix_json(const FormMatrix& m)
{
    json rows = json::array();
    for (int j = 0; j < m.r; ++j) {
        json row = json::array();
        for (int k = 0; k < m.r; ++k) row.push_back(m(j, k).str());
        rows.push_back(row);
    }
    return rows;
}

json series_json(const Series& s)
{
    json a = json::array();
    for (const auto& c : s) a.push_back(to_pq(c));
    return a;
}

json ints(const std::vector<int>& v) { return json(v); }

size_t term_count(const Derivation& D)
{
    size_t n = 0;
    for (const auto* v : {&D.lam, &D.eps, &D.th, &D.chi, &D.x})
        for (const auto& img : *v)
            if (img) n += img->terms.size();
    return n;
}

class Report {
public:
    void add(json record) { lines_.push_back(std::move(record)); }
    void note(const std::string& key, const std::string& value) { table_.push_back(key + ": " + value); }
    // records a named invariant; a failure makes the run exit with kInvariantViolation
    void check(const std::string& name, bool ok, json detail = json::object())
    {
        detail["record"] = "check";
        detail["name"] = name;
        detail["ok"] = ok;
        add(detail);
        note("check " + name, ok ? "ok" : "FAILED");
        if (!ok) failed_ = true;
    }
    bool failed() const { return failed_; }

    std::string text() const
    {
        std::string s;
        for (const auto& l : lines_) s += l.dump() + "\n";
        return s;
    }
    std::string table() const
    {
        std::string s;
        for (const auto& l : table_) s += l + "\n";
        return s;
    }

private:
    std::vector<json> lines_;
    std::vector<std::string> table_;
    bool failed_ = false;
};

int get_int(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number_integer()) throw ConfigError(std::string("missing integer field '") + key + "'");
    return j.at(key).get<int>();
}

int index_at(const json& t, size_t pos, int bound, const char* what)
{
    if (!t.at(pos).is_number_integer()) throw ConfigError(std::string(what) + " index must be an integer");
    int i = t.at(pos).get<int>();
    if (i < 0 || i >= bound) throw ConfigError(std::string(what) + " index out of range: " + std::to_string(i));
    return i;
}

Rat parse_scalar(const json& v)
{
    if (v.is_number_integer()) return Rat(v.get<long long>());
    if (v.is_string()) {
        try {
            return parse_rat(v.get<std::string>());
        } catch (const std::exception&) {
            throw ConfigError("malformed rational '" + v.get<std::string>() + "'");
        }
    }
    throw ConfigError("expected an integer or a \"p/q\" string, got " + v.dump());
}

// structure functions must be polynomials in the chart coordinates
Poly parse_function(const json& v, int m)
{
    GradedElement e = parse_element(v);
    for (const auto& [w, c] : e.terms) {
        if (w.lam || w.eps || w.th || MultiIndex::norm(w.chi)) throw ConfigError("structure functions may only use chart coordinates x");
        for (int a = m; a < kMaxEven; ++a)
            if (w.x[a]) throw ConfigError("chart coordinate index out of range");
    }
    return e;
}

// polyvector inputs in Lam_{<nlam}, Eps_{<neps}, Chi_{<nchi}
GradedElement parse_polyvector(const json& v, int nlam, int neps, int nchi)
{
    GradedElement e = parse_element(v);
    for (const auto& [w, c] : e.terms) {
        if (w.th || MultiIndex::norm(w.x)) throw ConfigError("polyvector inputs may not use th or x");
        if ((w.lam >> nlam) || (w.eps >> neps)) throw ConfigError("odd generator index out of range");
        for (int a = nchi; a < kMaxEven; ++a)
            if (w.chi[a]) throw ConfigError("chi index out of range");
    }
    return e;
}

json load_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

const json& inputs(const json& config)
{
    static const json empty = json::object();
    return config.contains("inputs") ? config.at("inputs") : empty;
}

std::uint64_t require_seed(const RunConfig& cfg)
{
    if (!cfg.seed) throw PreconditionError("this command samples graph weights and needs --seed");
    return *cfg.seed;
}

TaylorOptions taylor_options(const RunConfig& cfg)
{
    TaylorOptions opt;
    opt.mode.monte_carlo = cfg.weights == "mc";
    opt.mode.samples = cfg.samples;
    opt.mode.seed = require_seed(cfg);
    return opt;
}

void require_fedosov_connection(const LiePairSpec& s, const ConnectionSpec& conn)
{
    if (!extends_bott(s, conn)) throw PreconditionError("connection does not extend the Bott A-connection");
    if (!torsion(s, conn).zero()) throw PreconditionError("connection has torsion");
}

// ---------------------------------------------------------------------------

void cmd_validate(Report& rep, const LiePairSpec& s, const ConnectionSpec& conn)
{
    bool bott = extends_bott(s, conn);
    bool tf = torsion(s, conn).zero();
    rep.add({{"record", "connection"}, {"extends_bott", bott}, {"torsion_free", tf}});
    rep.note("connection extends Bott", bott ? "yes" : "no");
    rep.note("connection torsion-free", tf ? "yes" : "no");
}

void cmd_fedosov(Report& rep, const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    require_fedosov_connection(s, conn);
    auto F = fedosov_X(s, conn, N);
    for (int k = 2; k <= N; ++k) rep.add({{"record", "fedosov_term"}, {"k", k}, {"components", field_json(F.X[k])}});

    rep.check("x2_is_h_of_curvature", F.X[2] == h_field(s, curvature_field(s, conn, N)));
    bool gauge = true;
    for (int k = 2; k <= N; ++k) gauge = gauge && is_zero(h_field(s, F.X[k]));
    rep.check("h_of_x_vanishes", gauge);

    size_t residual = term_count(q_square_residual(F));
    rep.add({{"record", "q_square_residual"}, {"trunc", N}, {"q_square_residual", residual}});
    rep.note("q_square_residual", std::to_string(residual));
    rep.check("q_square_zero", residual == 0);
}

void cmd_atiyah(Report& rep, const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    require_fedosov_connection(s, conn);
    if (N < 3) throw PreconditionError("atiyah needs --trunc >= 3");
    auto pair = atiyah_cocycle_pair(s, conn);
    auto F = fedosov_X(s, conn, N);
    auto at = atiyah_cocycle_fedosov(F);
    rep.add({{"record", "atiyah_pair"}, {"matrix", matrix_json(pair)}});
    rep.add({{"record", "atiyah_fedosov"}, {"trunc", N}, {"matrix", matrix_json(at)}});

    auto sig = [&](const GradedElement& x) { return sigma(s, x); };
    rep.check("sigma_transports_atiyah", map_entries(at, sig) == pair);
    rep.check("trace_is_d_of_divergence", trace(at) == fedosov_d_function(s, divergence(F)));

    auto R = curvature(s, conn);
    bool vanishes = is_coboundary(s, bott_module(s, 2, 1), atiyah_cochain(s, R), 2);
    rep.add({{"record", "atiyah_class"}, {"zero", vanishes}, {"coboundary_degree_bound", 2}});
    rep.note("atiyah class", vanishes ? "zero" : "nonzero");
}

void cmd_todd(Report& rep, const LiePairSpec& s, const ConnectionSpec& conn, int K)
{
    const std::pair<ToddKind, const char*> kinds[] = {
        {ToddKind::Td, "td"}, {ToddKind::TTodd, "ttodd"}, {ToddKind::SqrtTd, "sqrt_td"}, {ToddKind::SqrtTTodd, "sqrt_ttodd"}};
    std::map<ToddKind, Series> ser;
    for (auto [kind, name] : kinds) {
        ser[kind] = todd_series(kind, K);
        rep.add({{"record", "series"}, {"kind", name}, {"order", K}, {"coefficients", series_json(ser[kind])}});
    }
    bool odd_zero = true;
    for (int k = 1; k <= K; k += 2) odd_zero = odd_zero && ser[ToddKind::TTodd][k] == 0;
    rep.check("ttodd_odd_coefficients_zero", odd_zero);
    rep.check("sqrt_td_squared", series_mul(ser[ToddKind::SqrtTd], ser[ToddKind::SqrtTd], K) == ser[ToddKind::Td]);
    rep.check("sqrt_ttodd_squared", series_mul(ser[ToddKind::SqrtTTodd], ser[ToddKind::SqrtTTodd], K) == ser[ToddKind::TTodd]);

    if (!extends_bott(s, conn)) throw PreconditionError("connection does not extend the Bott A-connection");
    auto at = atiyah_cocycle_pair(s, conn);
    int kc = std::min(K, s.r());
    for (auto [kind, name] : kinds) {
        auto T = todd_cocycle(at, kind, kc);
        json comps = json::array();
        for (const auto& c : T.components) comps.push_back(c.str());
        rep.add({{"record", "todd_cocycle"}, {"kind", name}, {"components", comps}});
        if (s.r() <= 3) rep.check(std::string(name) + "_trace_log_matches_determinant", todd_determinant(at, kind, kc) == T.total());
    }
}

void cmd_cohomology(Report& rep, const LiePairSpec& s, int cutoff)
{
    const int lo = -1, hi = 2;
    for (Side side : {Side::T, Side::D}) {
        auto c = cohomology(s, side, lo, hi, cutoff);
        const char* name = side == Side::T ? "T" : "D";
        rep.add({{"record", "cohomology"}, {"side", name}, {"lo", lo}, {"hi", hi}, {"cutoff", cutoff},
                 {"cochain_dims", ints(c.cochain_dims)}, {"ranks", ints(c.ranks)}});
        rep.note(std::string("ranks ") + name, json(c.ranks).dump());
    }
}

void cmd_hkr_check(Report& rep, const LiePairSpec& s, int cutoff)
{
    const int lo = -1, hi = 2;
    auto cmp = hkr_comparison(s, lo, hi, cutoff);
    rep.add({{"record", "hkr_comparison"}, {"lo", lo}, {"hi", hi}, {"cutoff", cutoff},
             {"rank_T", ints(cmp.rank_T)}, {"rank_D", ints(cmp.rank_D)}, {"rank_map", ints(cmp.rank_map)}});
    rep.check("hkr_rank_preserving", cmp.rank_preserving());

    // hkr sends polyvector cocycles to cocycles
    auto t = cohomology(s, Side::T, lo, hi, cutoff);
    PairPbw P(s);
    bool cocycles = true;
    for (const auto& reps : t.t_reps)
        for (const auto& z : reps) cocycles = cocycles && total_d_D(P, hkr(s, z)).is_zero();
    rep.check("hkr_maps_cocycles_to_cocycles", cocycles);
}

void cmd_graph_weights(Report& rep, const RunConfig& cfg)
{
    const int n = cfg.aerial, m = cfg.terrestrial;
    if (n < 1 || m < 0 || 2 * n + m - 2 < 0) throw PreconditionError("graph type needs n >= 1, m >= 0, 2n + m >= 2");
    WeightMode mode;
    mode.monte_carlo = cfg.weights == "mc";
    mode.samples = cfg.samples;
    if (mode.monte_carlo || n >= 2) mode.seed = require_seed(cfg);
    auto graphs = enumerate_graphs(n, m, 2 * n + m - 2);
    rep.note("graphs", std::to_string(graphs.size()));
    for (const auto& g : graphs) {
        auto w = weight(g, mode);
        json r = {{"record", "graph_weight"}, {"graph", g.key()}, {"source", w.is_exact() ? "closed_form" : "monte_carlo"}};
        r["exact"] = w.is_exact() ? json(to_pq(w.exact)) : json(nullptr);
        r["estimate"] = numeric(w.value, w.stderr_);
        if (!w.is_exact()) {
            r["seed"] = w.seed;
            r["samples"] = w.samples;
        }
        rep.add(r);
        rep.note("weight " + g.key(), w.is_exact() ? to_pq(w.exact) : r["estimate"]["display"].get<std::string>());
    }
}

GradedElement chi_gen(int i) { return GradedElement::gen({Gen::Chi, i}); }

void cmd_star_product(Report& rep, const RunConfig& cfg, const json& config)
{
    const json& in = inputs(config);
    int d = 2;
    GradedElement pi = GradedElement::gen({Gen::Eps, 0}) * GradedElement::gen({Gen::Eps, 1});
    if (in.contains("poisson")) {
        const json& p = in.at("poisson");
        d = get_int(p, "dim");
        if (d < 1 || d > kMaxEven) throw ConfigError("poisson.dim out of range");
        pi = GradedElement();
        if (!p.contains("bivector") || !p.at("bivector").is_array()) throw ConfigError("poisson.bivector must be a list");
        for (const auto& t : p.at("bivector")) {
            if (!t.is_array() || t.size() != 3) throw ConfigError("bivector entries are [i, j, value]");
            int i = index_at(t, 0, d, "bivector"), j = index_at(t, 1, d, "bivector");
            pi += parse_polyvector(t.at(2), 0, 0, d) * GradedElement::gen({Gen::Eps, i}) * GradedElement::gen({Gen::Eps, j});
        }
    }
    std::vector<GradedElement> fs = {chi_gen(0), d > 1 ? chi_gen(1) : chi_gen(0) * chi_gen(0)};
    if (in.contains("functions")) {
        fs.clear();
        for (const auto& f : in.at("functions")) fs.push_back(parse_polyvector(f, 0, 0, d));
        if (fs.empty()) throw ConfigError("inputs.functions is empty");
    }
    int order = cfg.order < 0 ? 2 : cfg.order;
    if (order > 2) throw PreconditionError("star-product supports --order <= 2");

    auto opt = taylor_options(cfg);
    auto S = star_product(pi, d, order, opt);
    rep.add({{"record", "poisson"}, {"dim", d}, {"bivector", pi.str()}, {"order", order}, {"graphs", S.graphs}});
    for (size_t k = 0; k < S.coefficients.size(); ++k)
        rep.add({{"record", "star_coefficient"}, {"hbar", k}, {"terms", numeric_op_json(S.coefficients[k], d)}});

    bool product_ok = true;
    for (const auto& f : fs)
        for (const auto& g : fs) {
            auto fg = star_apply(S, {to_numeric(f)}, {to_numeric(g)});
            json series = json::array();
            for (const auto& c : fg) series.push_back(numeric_poly_json(c));
            rep.add({{"record", "star_apply"}, {"f", f.str()}, {"g", g.str()}, {"series", series}});
            product_ok = product_ok && compare(fg[0], to_numeric(f * g)).max_abs == 0;
        }
    rep.check("hbar0_is_product", product_ok);

    Discrepancy worst;
    double worst_sigmas = 0.0;
    for (const auto& a : fs)
        for (const auto& b : fs)
            for (const auto& c : fs) {
                auto A = to_numeric(a), B = to_numeric(b), C = to_numeric(c);
                auto lhs = star_apply(S, star_apply(S, {A}, {B}), {C});
                auto rhs = star_apply(S, {A}, star_apply(S, {B}, {C}));
                for (size_t k = 0; k < lhs.size(); ++k) {
                    auto dk = compare(lhs[k], rhs[k]);
                    if (dk.max_abs > worst.max_abs) worst = dk;
                    worst_sigmas = std::max(worst_sigmas, dk.max_sigmas);
                }
            }
    // the residual must be consistent with the propagated weight error; the absolute
    // target is reported separately since it depends on --samples
    bool target = worst.max_abs <= kAssociativityTolerance;
    rep.check("associativity_within_error", worst.max_abs == 0 || worst_sigmas < kAssociativitySigmaLimit,
              {{"residual", numeric(worst.max_abs, worst.max_error)}, {"max_sigmas", worst_sigmas},
               {"sigma_limit", kAssociativitySigmaLimit}, {"target", kAssociativityTolerance}, {"meets_target", target}});
    rep.note("associativity residual", numeric(worst.max_abs, worst.max_error)["display"].get<std::string>() +
                                           (target ? " (meets 1e-2 target)" : " (above 1e-2 target, raise --samples)"));
}

void cmd_duflo(Report& rep, const LiePairSpec& s, int d)
{
    auto g = lie_algebra_of(s);
    rep.add({{"record", "pbw_basis_order"}, {"basis", g.names}});
    rep.add({{"record", "duflo_element"}, {"square_root", true}, {"order", d}, {"series", duflo_element(g, d, true).str()}});
    auto R = duflo_check(g, d);
    json inv = json::array();
    for (const auto& p : R.invariants) inv.push_back(sym_str(g, p));
    rep.add({{"record", "invariants"}, {"degree", d}, {"basis", inv}});
    rep.note("invariants", std::to_string(R.invariants.size()));
    for (const auto& p : R.pairs)
        rep.add({{"record", "duflo_pair"}, {"p", sym_str(g, p.p)}, {"q", sym_str(g, p.q)}, {"multiplicative", p.multiplicative},
                 {"plain_discrepancy", uea_str(g, p.plain_discrepancy)}});
    rep.add({{"record", "plain_pbw"}, {"discrepancy_seen", R.plain_discrepancy_seen()}});
    rep.note("plain pbw discrepancy", R.plain_discrepancy_seen() ? "nonzero" : "zero");
    rep.check("duflo_multiplicative", R.all_multiplicative());
}

void cmd_phi1(Report& rep, const RunConfig& cfg, const json& config, const LiePairSpec& s, const ConnectionSpec& conn, int N)
{
    require_fedosov_connection(s, conn);
    if (N < 3) throw PreconditionError("phi1-check needs --trunc >= 3");
    const json& in = inputs(config);
    GradedElement gamma = in.contains("gamma") ? parse_polyvector(in.at("gamma"), s.l, s.r(), s.r())
                                               : (s.r() >= 2 ? GradedElement::gen({Gen::Eps, 0}) * GradedElement::gen({Gen::Eps, 1})
                                                             : GradedElement::gen({Gen::Eps, 0}));
    if (s.r() == 0) throw PreconditionError("phi1-check needs a nonzero quotient B");
    auto opt = taylor_options(cfg);
    auto F = fedosov_X(s, conn, N);
    GradedElement gt = truncate(gamma, N);
    auto res = phi_n(F, {gt}, opt);
    auto ref = hkr_sqrt_ttodd(F, gt);
    rep.add({{"record", "phi1"}, {"gamma", gt.str()}, {"trunc", N}, {"graphs", res.graphs}, {"monte_carlo_graphs", res.monte_carlo},
             {"terms", numeric_op_json(res.op, s.r())}});
    rep.add({{"record", "hkr_sqrt_ttodd"}, {"operator", ref.str()}});
    auto dsc = compare(below(res.op, N - 2), below(ref, N - 2));
    bool ok = dsc.max_abs == 0 || (dsc.max_abs <= kPhiAbsTolerance && dsc.max_sigmas < kPhiSigmaLimit);
    rep.check("phi1_matches_hkr_sqrt_ttodd", ok,
              {{"compared_below_sdeg", N - 2}, {"max_abs", numeric(dsc.max_abs, dsc.max_error)}, {"max_sigmas", dsc.max_sigmas},
               {"sigma_limit", kPhiSigmaLimit}, {"abs_tolerance", kPhiAbsTolerance}});
}

int dispatch(Report& rep, const RunConfig& cfg, const json& config)
{
    auto s = load_spec(config);
    auto conn = load_connection(config, s);
    auto vr = validate(s);
    json viol = json::array();
    for (const auto& v : vr.violations) viol.push_back({{"identity", v.identity}, {"witness", v.witness}});
    rep.add({{"record", "validation"}, {"ok", vr.ok}, {"violations", viol}, {"basis", s.names}});
    rep.note("spec valid", vr.ok ? "yes" : "no");
    if (!vr.ok) return kValidationFailure;

    const std::string& c = cfg.command;
    auto trunc = [&](int def) { return cfg.trunc < 0 ? def : cfg.trunc; };
    auto order = [&](int def) { return cfg.order < 0 ? def : cfg.order; };
    if (c == "validate") cmd_validate(rep, s, conn);
    else if (c == "fedosov") cmd_fedosov(rep, s, conn, trunc(6));
    else if (c == "atiyah") cmd_atiyah(rep, s, conn, trunc(6));
    else if (c == "todd") cmd_todd(rep, s, conn, order(8));
    else if (c == "cohomology") cmd_cohomology(rep, s, order(3));
    else if (c == "hkr-check") cmd_hkr_check(rep, s, order(3));
    else if (c == "graph-weights") cmd_graph_weights(rep, cfg);
    else if (c == "star-product") cmd_star_product(rep, cfg, config);
    else if (c == "duflo-check") cmd_duflo(rep, s, order(4));
    else if (c == "phi1-check") cmd_phi1(rep, cfg, config, s, conn, trunc(4));
    return rep.failed() ? kInvariantViolation : kOk;
}

} // namespace

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c = {"validate", "fedosov", "atiyah", "todd", "cohomology",
                                               "hkr-check", "graph-weights", "star-product", "duflo-check", "phi1-check"};
    return c;
}

GradedElement parse_element(const json& v)
{
    if (!v.is_array()) return GradedElement::scalar(parse_scalar(v));
    GradedElement sum;
    for (const auto& t : v) {
        if (!t.is_object() || !t.contains("c")) throw ConfigError("monomials are objects with a coefficient \"c\"");
        GradedElement mono = GradedElement::scalar(parse_scalar(t.at("c")));
        auto odd = [&](const char* key, Gen kind) {
            if (!t.contains(key)) return;
            for (const auto& i : t.at(key)) {
                if (!i.is_number_integer() || i.get<int>() < 0 || i.get<int>() >= kMaxOdd) throw ConfigError(std::string("bad ") + key + " index");
                mono = mono * GradedElement::gen({kind, i.get<int>()});
            }
        };
        auto even = [&](const char* key, Gen kind) {
            if (!t.contains(key)) return;
            const json& e = t.at(key);
            if (!e.is_array() || e.size() > static_cast<size_t>(kMaxEven)) throw ConfigError(std::string("bad ") + key + " exponents");
            for (size_t i = 0; i < e.size(); ++i) {
                if (!e[i].is_number_integer() || e[i].get<int>() < 0) throw ConfigError(std::string("bad ") + key + " exponent");
                for (int p = 0; p < e[i].get<int>(); ++p) mono = mono * GradedElement::gen({kind, static_cast<int>(i)});
            }
        };
        odd("lam", Gen::Lam);
        odd("eps", Gen::Eps);
        even("chi", Gen::Chi);
        even("x", Gen::X);
        sum += mono;
    }
    return sum;
}

LiePairSpec load_spec(const json& config)
{
    if (!config.is_object()) throw ConfigError("config must be an object");
    if (!config.contains("ranks")) throw ConfigError("missing 'ranks'");
    const json& ranks = config.at("ranks");
    int l = get_int(ranks, "l"), rA = get_int(ranks, "rA");
    if (l < 1 || l > 12 || rA < 0 || rA > l || l - rA > kMaxEven) throw ConfigError("ranks out of range");

    int m = 0;
    bool chart = false;
    const json base = config.value("base", json("point"));
    if (base.is_string()) {
        if (base.get<std::string>() != "point") throw ConfigError("base must be \"point\" or a chart object");
    } else if (base.is_object()) {
        chart = true;
        m = get_int(base, "dim");
        if (m < 0 || m > kMaxEven) throw ConfigError("chart dimension out of range");
    } else {
        throw ConfigError("malformed 'base'");
    }

    LiePairSpec s(l, rA, m);
    s.base = chart ? BaseKind::PolyChart : BaseKind::Point;
    if (chart && base.contains("anchor")) {
        for (const auto& t : base.at("anchor")) {
            if (!t.is_array() || t.size() != 3) throw ConfigError("anchor entries are [i, a, value]");
            s.rho(index_at(t, 0, l, "anchor"), index_at(t, 1, m, "anchor")) = parse_function(t.at(2), m);
        }
    }
    if (config.contains("structure_constants")) {
        const json& sc = config.at("structure_constants");
        if (!sc.is_array()) throw ConfigError("structure_constants must be a list");
        for (const auto& t : sc) {
            if (!t.is_array() || t.size() != 4) throw ConfigError("structure constants are [i, j, k, value]");
            int i = index_at(t, 0, l, "bracket"), j = index_at(t, 1, l, "bracket"), k = index_at(t, 2, l, "bracket");
            if (i == j) throw ConfigError("bracket entry with i == j");
            s.set_bracket(i, j, k, parse_function(t.at(3), m));
        }
    }
    s.names.clear();
    if (config.contains("basis_names")) {
        const json& nm = config.at("basis_names");
        if (!nm.is_array() || nm.size() != static_cast<size_t>(l)) throw ConfigError("basis_names must list l names");
        for (const auto& n : nm) {
            if (!n.is_string()) throw ConfigError("basis names must be strings");
            s.names.push_back(n.get<std::string>());
        }
    } else {
        for (int i = 0; i < l; ++i) s.names.push_back("e" + std::to_string(i));
    }
    return s;
}

ConnectionSpec load_connection(const json& config, const LiePairSpec& s)
{
    if (!config.contains("connection") || config.at("connection").is_null()) return make_torsion_free(s, bott_connection(s));
    const json& cn = config.at("connection");
    if (!cn.is_array()) throw ConfigError("connection must be a list of [i, j, k, value]");
    ConnectionSpec conn(s.l, s.r());
    for (const auto& t : cn) {
        if (!t.is_array() || t.size() != 4) throw ConfigError("connection entries are [i, j, k, value]");
        conn(index_at(t, 0, s.l, "connection"), index_at(t, 1, s.r(), "connection"), index_at(t, 2, s.r(), "connection")) =
            parse_function(t.at(3), s.m);
    }
    return conn;
}

RunResult run(const RunConfig& cfg)
{
    Report rep;
    json flags = {{"command", cfg.command}, {"trunc", cfg.trunc}, {"order", cfg.order}, {"weights", cfg.weights},
                  {"samples", cfg.samples}, {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                  {"aerial", cfg.aerial}, {"terrestrial", cfg.terrestrial}};
    int code = kOk;
    std::string message;
    json config;
    try {
        if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
            throw ConfigError("unknown command '" + cfg.command + "'");
        if (cfg.weights != "closed" && cfg.weights != "mc") throw ConfigError("--weights must be closed or mc");
        if (cfg.samples < 1) throw ConfigError("--samples must be positive");
        config = load_file(cfg.input);
        rep.add({{"record", "config"}, {"input", cfg.input}, {"flags", flags}, {"config", config}});
        code = dispatch(rep, cfg, config);
    } catch (const ConfigError& e) {
        code = kParseFailure;
        message = e.what();
    } catch (const PreconditionError& e) {
        code = kPreconditionFailure;
        message = e.what();
    } catch (const std::invalid_argument& e) {
        code = kPreconditionFailure;
        message = e.what();
    } catch (const std::domain_error& e) {
        code = kPreconditionFailure;
        message = e.what();
    } catch (const std::length_error& e) {
        code = kPreconditionFailure;
        message = e.what();
    } catch (const std::exception& e) {
        code = kInvariantViolation;
        message = std::string("internal error: ") + e.what();
    }
    if (config.is_null()) rep.add({{"record", "config"}, {"input", cfg.input}, {"flags", flags}, {"config", nullptr}});
    if (code == kValidationFailure) message = "specification failed validation";
    if (code == kInvariantViolation && message.empty()) message = "invariant check failed";
    rep.add({{"record", "STATUS"}, {"status", status_name(code)}, {"exit_code", code}, {"message", message}});
    rep.note("status", status_name(code) + (message.empty() ? "" : " (" + message + ")"));
    return {code, rep.text(), rep.table()};
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Lie pair formality toolkit"};
    RunConfig cfg;
    std::string seed;
    app.add_option("config", cfg.input, "JSON Lie pair specification")->required();
    app.add_option("--command", cfg.command, "validate | fedosov | atiyah | todd | cohomology | hkr-check | graph-weights | star-product | duflo-check | phi1-check");
    app.add_option("--trunc", cfg.trunc, "fibre truncation N");
    app.add_option("--order", cfg.order, "series order / degree bound K");
    app.add_option("--weights", cfg.weights, "graph weight mode: closed or mc");
    app.add_option("--samples", cfg.samples, "Monte Carlo samples per graph");
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--out", cfg.out, "report path (JSON lines); a summary table goes to stdout");
    app.add_option("--aerial", cfg.aerial, "graph-weights: aerial vertices n");
    app.add_option("--terrestrial", cfg.terrestrial, "graph-weights: terrestrial vertices m");
    try {
        app.parse(argc, argv);
        if (!seed.empty()) {
            size_t pos = 0;
            cfg.seed = std::stoull(seed, &pos);
            if (pos != seed.size()) throw std::invalid_argument("seed");
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParseFailure;
    } catch (const std::exception&) {
        std::cerr << "--seed must be a nonnegative integer\n";
        return kParseFailure;
    }

    auto res = run(cfg);
    if (cfg.out.empty()) {
        std::cout << res.report;
    } else {
        std::ofstream out(cfg.out, std::ios::binary);
        out << res.report;
        if (!out) {
            std::cerr << "cannot write " << cfg.out << "\n";
            return kPreconditionFailure;
        }
        std::cout << res.table;
    }
    return res.exit_code;
}

} // namespace lpf::cli
