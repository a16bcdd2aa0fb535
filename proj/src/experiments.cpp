#include "tml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "tml/ac.hpp"
#include "tml/barriers.hpp"
#include "tml/errors.hpp"
#include "tml/hash.hpp"
#include "tml/parallel.hpp"
#include "tml/potential.hpp"
#include "tml/probe.hpp"
#include "tml/ruelle.hpp"
#include "tml/spectral.hpp"

namespace tml {

namespace {

using nlohmann::json;

// Keyed access that remembers what was read, so leftovers can be rejected.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw InvalidArgument(where_ + " must be an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        if (!j_.contains(k)) throw InvalidArgument(where_ + ": missing '" + k + "'");
        used_.insert(k);
        return j_.at(k);
    }
    double num(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number()) throw InvalidArgument(where_ + ": '" + k + "' must be a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) throw InvalidArgument(where_ + ": '" + k + "' must be finite");
        return x;
    }
    double num(const std::string& k, double def) { return has(k) ? num(k) : def; }
    std::int64_t integer(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number_integer()) throw InvalidArgument(where_ + ": '" + k + "' must be an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& k, std::int64_t def) { return has(k) ? integer(k) : def; }
    std::string str(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        const auto& v = raw(k);
        if (!v.is_string()) throw InvalidArgument(where_ + ": '" + k + "' must be a string");
        return v.get<std::string>();
    }
    std::vector<std::int64_t> ints(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_array()) throw InvalidArgument(where_ + ": '" + k + "' must be an array of integers");
        std::vector<std::int64_t> out;
        for (const auto& x : v) {
            if (!x.is_number_integer()) throw InvalidArgument(where_ + ": '" + k + "' must hold integers");
            out.push_back(x.get<std::int64_t>());
        }
        return out;
    }
    std::vector<std::int64_t> ints(const std::string& k, std::vector<std::int64_t> def) {
        return has(k) ? ints(k) : def;
    }
    std::vector<double> nums(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_array()) throw InvalidArgument(where_ + ": '" + k + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw InvalidArgument(where_ + ": '" + k + "' must hold numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    std::vector<double> nums(const std::string& k, std::vector<double> def) { return has(k) ? nums(k) : def; }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!used_.count(k)) throw InvalidArgument(where_ + ": unknown or unused key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

struct Context {
    Section cfg;
    Section params;
    std::string experiment;
    std::string hash;
    std::filesystem::path dir;
    int threads = 0;
    std::vector<std::string> files;
    json config;

    PotentialSpec potential() { return PotentialSpec::from_json(cfg.raw("potential")); }

    std::vector<double> grid() {
        Section g(cfg.raw("energy_grid"), "energy_grid");
        double lo = g.num("min"), hi = g.num("max");
        std::int64_t count = g.integer("count");
        g.finish();
        if (count < 1) throw InvalidArgument("energy_grid: count must be at least 1");
        if (!(lo < hi)) throw InvalidArgument("energy_grid: min must be below max");
        if (count == 1) return {lo};
        return uniform_grid(lo, hi, count);
    }

    void done() {
        cfg.finish();
        params.finish();
    }

    std::filesystem::path path_for(const std::string& ext, const std::string& suffix = {}) {
        std::filesystem::path p = cfg.has("output_path") ? std::filesystem::path(cfg.str("output_path", ""))
                                                         : std::filesystem::path(experiment + ext);
        if (!suffix.empty()) p = p.parent_path() / (p.stem().string() + suffix + ext);
        if (p.is_relative()) p = dir / p;
        return p;
    }

    std::ofstream open(const std::filesystem::path& p) {
        if (p.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(p.parent_path(), ec);
        }
        std::ofstream os(p);
        if (!os) throw InvalidArgument("cannot write " + p.string());
        os.precision(17);
        files.push_back(p.string());
        return os;
    }

    void csv(const std::filesystem::path& p, const std::string& header, const std::function<void(std::ostream&)>& body,
             const std::string& extra = {}) {
        auto os = open(p);
        os << "# experiment=" << experiment << " config_hash=" << hash << extra << '\n' << header << '\n';
        body(os);
        if (!os) throw std::runtime_error("write failed: " + p.string());
    }

    void json_out(const std::filesystem::path& p, json result) {
        auto os = open(p);
        json doc{{"experiment", experiment}, {"config_hash", hash}, {"config", config}, {"result", std::move(result)}};
        os << doc.dump(2) << '\n';
        if (!os) throw std::runtime_error("write failed: " + p.string());
    }
};

Boundary bc_param(Section& s) {
    auto name = s.str("boundary", "dirichlet");
    auto b = boundary_from_name(name);
    if (b == Boundary::angle) throw InvalidArgument("boundary must be dirichlet or neumann_paper");
    return b;
}

void cesaro_scan(Context& c) {
    auto V = c.potential();
    auto grid = c.grid();
    auto L = c.cfg.integer("L");
    c.done();
    std::vector<CesaroTrace> tr(grid.size());
    parallel_for(grid.size(), c.threads, [&](std::size_t i) { tr[i] = cesaro_trace(V, grid[i], L); });
    c.csv(c.path_for(".csv"), "E,L,G_L", [&](std::ostream& os) {
        for (const auto& t : tr)
            for (std::size_t k = 0; k < t.L_values.size(); ++k)
                os << t.E << ',' << t.L_values[k] << ',' << std::exp(t.log_G[k]) << '\n';
    });
}

void lyapunov_scan(Context& c) {
    auto V = c.potential();
    auto grid = c.grid();
    auto L = c.cfg.integer("L");
    c.done();
    std::vector<double> g(grid.size());
    parallel_for(grid.size(), c.threads, [&](std::size_t i) { g[i] = lyapunov_estimate(V, grid[i], L); });
    c.csv(c.path_for(".csv"), "E,gamma", [&](std::ostream& os) {
        for (std::size_t i = 0; i < grid.size(); ++i) os << grid[i] << ',' << g[i] << '\n';
    });
}

void carmona(Context& c) {
    auto V = c.potential();
    auto grid = c.grid();
    auto L = c.cfg.integer("L");
    double theta = c.params.num("theta", 0.5 * std::numbers::pi);
    c.done();
    auto d = carmona_density(V, grid, L, theta, c.threads);
    c.csv(c.path_for(".csv"), "E,value", [&](std::ostream& os) {
        for (std::size_t i = 0; i < d.grid.size(); ++i) os << d.grid[i] << ',' << d.values[i] << '\n';
    });
}

void mfunction(Context& c) {
    auto V = c.potential();
    auto grid = c.grid();
    double eps = c.cfg.num("epsilon");
    auto bc = bc_param(c.params);
    c.done();
    if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
    std::vector<std::complex<double>> m(grid.size());
    parallel_for(grid.size(), c.threads, [&](std::size_t i) { m[i] = m_function(V, {grid[i], eps}, bc); });
    c.csv(c.path_for(".csv"), "E,re_m,im_m,density", [&](std::ostream& os) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            os << grid[i] << ',' << m[i].real() << ',' << m[i].imag() << ',' << m[i].imag() / std::numbers::pi << '\n';
    }, " boundary=" + std::string(boundary_name(bc)) + " N=" + std::to_string(m_truncation(eps)));
}

void parseval(Context& c) {
    auto V = c.potential();
    auto N = c.cfg.integer("N");
    auto bc = bc_param(c.params);
    std::int64_t first = bc == Boundary::dirichlet ? 1 : 2;
    auto sites = c.params.ints("sites", {first});
    c.done();
    auto rows = parseval_check(V, N, bc, sites);
    json out{{"N", N}, {"boundary", boundary_name(bc)}, {"rows", json::array()}};
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const auto& r = rows[k];
        out["rows"].push_back({{"site", sites[k]},
                               {"sum", r.sum},
                               {"sum_error", std::abs(r.sum - 1.0)},
                               {"max_ratio_error", r.max_ratio_error},
                               {"max_component_error", r.max_component_error},
                               {"degenerate", r.degenerate},
                               {"refined", r.refined},
                               {"unresolved", r.unresolved}});
    }
    auto spec = eig(V, N, bc);
    c.json_out(c.path_for(".json"), out);
    c.csv(c.path_for(".csv", "_spectrum"), "E_k,w_k", [&](std::ostream& os) {
        for (std::size_t k = 0; k < spec.E.size(); ++k) os << spec.E[k] << ',' << spec.w[k] << '\n';
    });
}

void ruelle(Context& c) {
    auto V = c.potential();
    auto L = c.cfg.integer("L");
    double E = c.params.num("E");
    auto range = c.params.ints("check_range", {100, std::max<std::int64_t>(100, L / 10)});
    c.done();
    if (L < 2) throw InvalidArgument("L must be at least 2");
    if (range.size() != 2) throw InvalidArgument("check_range must be [lo, hi]");
    auto tr = angle_trace(V, E, L);
    auto r = u_infinity(tr);
    json out{{"E", E},
             {"L", L},
             {"max_step_angle_ratio", max_step_angle_ratio(tr)},
             {"worst_tail_excess", r.converged ? json(r.worst_tail_excess()) : json(nullptr)},
             {"u_infinity", r.to_json()}};
    if (r.converged) {
        auto ge = growth_exponent(r, GrowthModel::log_n);
        out["growth_exponent"] = {{"slope", ge.slope}, {"limsup", ge.limsup}, {"liminf", ge.liminf},
                                  {"n_lo", ge.n_lo},   {"n_hi", ge.n_hi}};
        out["decay_check"] = bound_state_decay_check(r, tr, std::max<std::int64_t>(1, range[0]),
                                                     std::min(L, range[1]))
                                 .to_json();
    }
    c.json_out(c.path_for(".json"), out);
    c.csv(c.path_for(".csv", "_trace"), "n,theta_n,log_t_n", [&](std::ostream& os) {
        for (std::int64_t n = 1; n <= tr.size(); ++n)
            os << n << ',' << tr.theta[n - 1] << ',' << tr.log_t[n - 1] << '\n';
    });
}

void barrier_audit(Context& c) {
    auto V = c.potential();
    double E = c.params.num("E"), delta = c.params.num("delta");
    auto n = c.params.integer("n");
    auto window = c.params.ints("window", {-2 * (n + 1), 2 * (n + 1)});
    auto u0 = c.params.nums("u0", {1.0, 1.0});
    auto phi = c.params.integer("phi_grid", 16);
    c.done();
    if (window.size() != 2) throw InvalidArgument("window must be [lo, hi]");
    if (u0.size() != 2) throw InvalidArgument("u0 must be [u(1), u(0)]");
    auto cert = gap_certificate(V, E, delta, window[0], window[1], n);
    auto audit = growth_audit(V, cert, n, Vec2{u0[0], u0[1]}, static_cast<int>(phi));
    c.json_out(c.path_for(".json"), {{"certificate", cert.to_json()}, {"audit", audit.to_json()}});
}

void right_limit(Context& c) {
    double beta = c.params.num("beta", 1.5), lambda = c.params.num("lambda", 1.0);
    auto n_max = c.params.integer("n_max", 10000000);
    auto window = c.params.integer("window", 50);
    double tol = c.params.num("tol", 0.05);
    double E = c.params.num("E", 0.5);
    c.done();
    auto r = right_limit_search(beta, lambda, n_max, window, tol);
    auto V = cos_power(lambda, beta);
    auto W = r.limit_potential();
    json gaps = json::array();
    for (auto s : r.shifts) gaps.push_back(transfer_gap(V, W, s, E, window));
    auto out = r.to_json();
    out["transfer_gap_E"] = E;
    out["transfer_gaps"] = gaps;
    c.json_out(c.path_for(".json"), out);
}

void bernoulli_dump(Context& c) {
    auto K = c.params.integer("K");
    c.done();
    if (K < 1) throw InvalidArgument("K must be at least 1");
    auto b = bernoulli_sequence(K);
    c.csv(c.path_for(".csv"), "n,b_n", [&](std::ostream& os) {
        for (std::size_t i = 0; i < b.size(); ++i) os << i + 1 << ',' << b[i] << '\n';
    });
}

void discriminant_exp(Context& c) {
    auto V = c.potential();
    auto grid = c.grid();
    c.done();
    auto inside = discriminant_spectrum(V, grid);
    auto bands = band_count(grid, inside);
    std::vector<double> tr(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) tr[i] = discriminant(V, grid[i]);
    c.csv(c.path_for(".csv"), "E,discriminant,in_spectrum", [&](std::ostream& os) {
        for (std::size_t i = 0; i < grid.size(); ++i) os << grid[i] << ',' << tr[i] << ',' << (std::abs(tr[i]) <= 2.0 + 1e-12) << '\n';
    }, " period=" + std::to_string(period_of(V)) + " bands=" + std::to_string(bands));
}

void probe(Context& c) {
    auto base = c.potential();
    auto limit = PotentialSpec::from_json(c.params.raw("limit"));
    auto shifts = c.params.ints("shifts");
    auto grid = c.grid();
    auto L = c.cfg.integer("L", 1 << 12);
    c.done();
    auto rep = right_limit_probe(base, limit, shifts, grid, L, c.threads);
    c.json_out(c.path_for(".json"), rep.to_json());
}

void sparse_blocks(Context& c) {
    auto seed = c.cfg.integer("seed");
    auto grid = c.grid();
    double alpha = c.params.num("alpha");
    auto gaps = c.params.ints("gaps");
    auto blocks = c.params.ints("blocks");
    auto thresholds = c.params.nums("thresholds", {});
    c.done();
    if (seed < 0) throw InvalidArgument("seed must be non-negative");
    auto ev = sparse_block_evidence(alpha, static_cast<std::uint64_t>(seed), gaps, blocks, grid, thresholds, c.threads);
    c.json_out(c.path_for(".json"), ev.to_json());
}

struct Entry {
    void (*run)(Context&);
    const char* text;
};

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> r = {
        {"cesaro_scan",
         {cesaro_scan,
          "Cesaro averages G_L = L^-1 sum_{n<=L} ||T_E(n)||^2 along a dyadic schedule of L for each grid energy.\n"
          "Bounded liminf of G_L characterizes the essential support of the a.c. spectrum.\n"
          "keys: potential, energy_grid{min,max,count}, L\n"
          "output: CSV E,L,G_L"}},
        {"lyapunov_scan",
         {lyapunov_scan,
          "Finite-L Lyapunov exponent log||T_E(L)|| / L for each grid energy.\n"
          "keys: potential, energy_grid, L\n"
          "output: CSV E,gamma"}},
        {"carmona",
         {carmona,
          "Carmona approximant of the spectral density, 1 / (pi ||T_E(L) u_theta||^2), boundary angle theta.\n"
          "keys: potential, energy_grid, L, params{theta (default pi/2, Dirichlet)}\n"
          "output: CSV E,value"}},
        {"mfunction",
         {mfunction,
          "Weyl m-function at E + i epsilon by continued fraction, and the smeared density Im m / pi.\n"
          "keys: potential, energy_grid, epsilon, params{boundary: dirichlet | neumann_paper}\n"
          "output: CSV E,re_m,im_m,density"}},
        {"parseval",
         {parseval,
          "Eigenfunction completeness for the truncated half-line operator: sum_k u(n; E_k)^2 w_k = 1 at each site,\n"
          "with u normalized by the boundary condition and w_k the spectral weights.\n"
          "keys: potential, N, params{boundary, sites}\n"
          "output: JSON rows {site,sum,sum_error,max_ratio_error,max_component_error,...}; CSV <stem>_spectrum E_k,w_k"}},
        {"ruelle",
         {ruelle,
          "Singular angles theta_n of T(n), the summability sums sum a(n+1)^2/t(n)^2, sum t(m)^2 (tail)^2 and\n"
          "sum t(n)^-2, the limiting decaying direction u_inf with its tail bound, growth exponents of\n"
          "||T(n) u_inf||, and the pointwise decay bound for bounded potentials.\n"
          "keys: potential, L, params{E, check_range [lo,hi]}\n"
          "output: JSON u_infinity, growth_exponent, decay_check; CSV <stem>_trace n,theta_n,log_t_n"}},
        {"barrier_audit",
         {barrier_audit,
          "Gap certificate for a Dirichlet block around E, then the growth lower bounds for solutions on Z\n"
          "implied by a spectral gap of width delta: single-site, three-site, vector and window forms.\n"
          "Exit code 3 when the certificate cannot be verified.\n"
          "keys: potential (whole_line), params{E, delta, n, window [lo,hi], u0 [u(1),u(0)], phi_grid}\n"
          "output: JSON certificate, audit with per-inequality rows (ell, lhs_log, rhs_log, margin_sign)"}},
        {"right_limit",
         {right_limit,
          "Right limit of lambda cos(n^beta): shifts n_j whose windows approach lambda cos(2 pi sum b_l m^l),\n"
          "with the entrywise distance of the transfer matrices over the window at energy E.\n"
          "keys: params{beta, lambda, n_max, window, tol, E}\n"
          "output: JSON shifts, shift_errors, poly_coeffs, achieved_error, transfer_gaps"}},
        {"bernoulli_dump",
         {bernoulli_dump,
          "First K terms of the concatenation of all binary words ordered by length, then lexicographically.\n"
          "keys: params{K}\n"
          "output: CSV n,b_n"}},
        {"discriminant",
         {discriminant_exp,
          "Discriminant tr T_E(q) of a period-q potential on an energy grid; the spectrum is |tr| <= 2.\n"
          "keys: potential (periodic, constant or zero), energy_grid\n"
          "output: CSV E,discriminant,in_spectrum"}},
        {"probe",
         {probe,
          "Paired windowed Cesaro averages and Carmona densities of a potential at given shifts and of a\n"
          "candidate right limit. Finite-window evidence only.\n"
          "keys: potential, energy_grid, L (default 4096), params{limit, shifts}\n"
          "output: JSON records, shift_errors, transfer_gaps, divergence counts"}},
        {"sparse_blocks",
         {sparse_blocks,
          "Sparse composite potential: decaying random blocks separated by zero gaps. For each block j and\n"
          "grid energy, the norm of the transfer matrix across the block and the fraction of the grid where\n"
          "it reaches the threshold (default j).\n"
          "keys: seed, energy_grid, params{alpha < 1/2, gaps, blocks, thresholds}\n"
          "output: JSON blocks {start,end,threshold,fraction_at_least_j,log_norms}"}},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : registry()) v.push_back(k);
        return v;
    }();
    return names;
}

std::optional<std::string> describe_experiment(std::string_view name) {
    auto it = registry().find(std::string(name));
    if (it == registry().end()) return std::nullopt;
    return std::string(it->second.text);
}

RunResult run_experiment(const nlohmann::json& config, const std::string& out_dir, int threads) {
    RunResult res;
    try {
        if (!config.is_object()) throw InvalidArgument("config must be a JSON object");
        res.config_hash = hex64(fnv1a64(config.dump()));
        if (!config.contains("experiment") || !config.at("experiment").is_string())
            throw InvalidArgument("config: missing 'experiment'");
        auto name = config.at("experiment").get<std::string>();
        auto it = registry().find(name);
        if (it == registry().end()) throw InvalidArgument("unknown experiment '" + name + "'");
        static const json empty = json::object();
        Context c{Section(config, "config"), Section(config.contains("params") ? config.at("params") : empty, "params"),
                  name, res.config_hash, out_dir.empty() ? "." : out_dir, resolve_threads(threads), {}, config};
        c.cfg.raw("experiment");
        if (config.contains("params")) c.cfg.raw("params");
        if (config.contains("output_path")) c.cfg.str("output_path", "");
        it->second.run(c);
        res.files = c.files;
    } catch (const Refusal& e) {
        res.exit_code = exit_refusal;
        res.message = e.what();
    } catch (const InvalidArgument& e) {
        res.exit_code = exit_config;
        res.message = e.what();
    } catch (const DomainError& e) {
        res.exit_code = exit_config;
        res.message = e.what();
    } catch (const nlohmann::json::exception& e) {
        res.exit_code = exit_config;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = exit_failure;
        res.message = e.what();
    }
    return res;
}

RunResult run_experiment_text(std::string_view text, const std::string& out_dir, int threads) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        RunResult r;
        r.exit_code = exit_config;
        r.message = std::string("config is not valid JSON: ") + e.what();
        return r;
    }
    return run_experiment(j, out_dir, threads);
}

}  // namespace tml
