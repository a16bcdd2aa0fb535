#include "tml/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tml/errors.hpp"
#include "tml/parallel.hpp"
#include "tml/spectral.hpp"
#include "tml/transfer.hpp"

namespace tml {

namespace {

double min_distance(const PotentialSpec& V, double E, std::int64_t lo, std::int64_t hi) {
    std::vector<double> diag;
    diag.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) diag.push_back(V.eval(k));
    auto s = tridiag_first_row(diag);
    double d = std::numeric_limits<double>::infinity();
    for (double x : s.E) d = std::min(d, std::abs(x - E));
    return d;
}

AuditRow make_row(std::int64_t ell, int phi, double lhs_log, double rhs_log) {
    AuditRow r;
    r.ell = ell;
    r.phi = phi;
    r.lhs_log = lhs_log;
    r.rhs_log = rhs_log;
    if (rhs_log == -std::numeric_limits<double>::infinity()) {
        r.status = AuditStatus::trivial;
        r.margin = std::numeric_limits<double>::infinity();
        return r;
    }
    r.margin = std::expm1(lhs_log - rhs_log);
    if (std::abs(r.margin) < 1e-6)
        r.status = AuditStatus::inconclusive;
    else
        r.status = r.margin > 0 ? AuditStatus::pass : AuditStatus::fail;
    return r;
}

double log_sq(double x) { return x == 0.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(std::abs(x)); }

double lse(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log u(k)^2 from T(k, 0) applied to (u(1), u(0)) = (u(k+1), u(k)) in scaled form
double log_u_sq(const ScaledVec& x) { return x.v.y == 0.0 ? log_sq(0.0) : log_sq(x.v.y) + 2.0 * x.log_scale; }

nlohmann::json rows_json(const std::vector<AuditRow>& rows) {
    auto j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o{{"ell", r.ell},
                         {"lhs_log", r.lhs_log},
                         {"rhs_log", std::isfinite(r.rhs_log) ? nlohmann::json(r.rhs_log) : nlohmann::json(nullptr)},
                         {"margin_sign", r.margin > 0 ? 1 : (r.margin < 0 ? -1 : 0)},
                         {"status", audit_status_name(r.status)}};
        if (r.phi >= 0) o["phi"] = r.phi;
        j.push_back(o);
    }
    return j;
}

}  // namespace

nlohmann::json GapCertificate::to_json() const {
    return {{"E", E},   {"delta", delta}, {"lo", lo}, {"hi", hi}, {"min_eig_distance", min_eig_distance},
            {"min_eig_distance_doubled", min_eig_distance_doubled}, {"verified", verified}};
}

GapCertificate gap_certificate(const PotentialSpec& V, double E, double delta, std::int64_t lo, std::int64_t hi,
                               std::int64_t n) {
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (n < 0) throw InvalidArgument("n must be non-negative");
    if (lo > -(n + 1) || hi < n + 1) throw InvalidArgument("window too small: it must contain -(n+1)..n+1");
    if (lo < 0 && V.domain != Domain::whole_line) throw InvalidArgument("window on Z needs a whole-line potential");
    GapCertificate c;
    c.E = E;
    c.delta = delta;
    c.lo = lo;
    c.hi = hi;
    std::int64_t half = (hi - lo + 1) / 2;
    c.min_eig_distance = min_distance(V, E, lo, hi);
    c.min_eig_distance_doubled = min_distance(V, E, lo - half, hi + half);
    c.verified = c.min_eig_distance >= delta && c.min_eig_distance_doubled >= delta &&
                 std::abs(c.min_eig_distance - c.min_eig_distance_doubled) < delta / 100.0;
    return c;
}

ScaledProduct whole_line_transfer(const PotentialSpec& V, double E, std::int64_t n, std::int64_t m) {
    if ((n < 0 || m < 0) && V.domain != Domain::whole_line)
        throw DomainError("negative sites need a whole-line potential");
    return transfer(V, E, n, m);
}

std::string_view audit_status_name(AuditStatus s) {
    switch (s) {
        case AuditStatus::pass: return "pass";
        case AuditStatus::inconclusive: return "inconclusive";
        case AuditStatus::fail: return "fail";
        case AuditStatus::trivial: return "trivial";
    }
    return "?";
}

nlohmann::json GrowthAudit::to_json() const {
    return {{"E", E},
            {"delta", delta},
            {"n", n},
            {"pass", pass},
            {"single_site", rows_json(single)},
            {"three_site", rows_json(triple)},
            {"vector", rows_json(vector)},
            {"window", rows_json(window)}};
}

GrowthAudit growth_audit(const PotentialSpec& V, const GapCertificate& cert, std::int64_t n, Vec2 u0, int phi_grid) {
    if (!cert.verified) throw Refusal("gap certificate not verified; the growth bounds do not apply");
    if (cert.lo > -(n + 1) || cert.hi < n + 1) throw Refusal("gap certificate window does not cover D_{n+1}");
    if (phi_grid < 1) throw InvalidArgument("phi grid needs at least one angle");
    if (V.domain != Domain::whole_line) throw InvalidArgument("growth audit needs a whole-line potential");
    const double E = cert.E, d2 = cert.delta * cert.delta, lg = std::log1p(d2), ld2 = std::log(d2);
    GrowthAudit a;
    a.E = E;
    a.delta = cert.delta;
    a.n = n;

    // u(k) for |k| <= n+1 in log-square form
    std::vector<double> up(static_cast<std::size_t>(n + 2)), um(static_cast<std::size_t>(n + 2));
    up[0] = um[0] = log_sq(u0.y);
    ScaledProduct Tf, Tb;
    for (std::int64_t k = 1; k <= n + 1; ++k) {
        Tf.push(step_matrix(V.eval(k), E));            // T(k, 0)
        Tb.push(inverse_step_matrix(V.eval(-k + 1), E));  // T(-k, 0)
        up[static_cast<std::size_t>(k)] = log_u_sq(Tf.apply(u0));
        um[static_cast<std::size_t>(k)] = log_u_sq(Tb.apply(u0));
    }
    auto a_ell = [&](std::int64_t l) { return lse(up[static_cast<std::size_t>(l)], um[static_cast<std::size_t>(l)]); };

    for (std::int64_t l = 1; l <= n + 1; ++l)
        a.single.push_back(make_row(l, -1, a_ell(l), ld2 + double(l - 1) * lg + up[0]));
    double three = lse(up[0], lse(up[1], um[1]));
    for (std::int64_t l = 2; l <= n + 1; ++l)
        a.triple.push_back(make_row(l, -1, a_ell(l), ld2 + double(l - 2) * lg + three));

    ScaledProduct F, B;
    std::vector<ScaledProduct> fwd, bwd;
    for (std::int64_t l = 1; l <= n; ++l) {
        F.push(step_matrix(V.eval(l), E));
        B.push(inverse_step_matrix(V.eval(-l + 1), E));
        fwd.push_back(F);
        bwd.push_back(B);
    }
    for (int p = 0; p < phi_grid; ++p) {
        double phi = std::numbers::pi * p / phi_grid;
        Vec2 v{std::cos(phi), std::sin(phi)};
        for (std::int64_t l = 1; l <= n; ++l) {
            const auto& f = fwd[static_cast<std::size_t>(l - 1)];
            const auto& b = bwd[static_cast<std::size_t>(l - 1)];
            double lhs = lse(2.0 * f.log_norm_applied(v), 2.0 * b.log_norm_applied(v));
            a.vector.push_back(make_row(l, p, lhs, ld2 + double(l - 1) * lg));
        }
    }
    double lw = whole_line_transfer(V, E, -n, n).log_norm();
    a.window.push_back(make_row(n, -1, lw, std::log(0.5) + ld2 + double(n - 1) * lg));

    a.pass = true;
    for (const auto* rows : {&a.single, &a.triple, &a.vector, &a.window})
        for (const auto& r : *rows)
            if (r.status != AuditStatus::trivial && r.margin < -1e-8) a.pass = false;
    return a;
}

nlohmann::json BarrierScan::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& r : records) rows.push_back({{"n", r.n}, {"abs_v", r.abs_v}, {"min_step_norm", r.min_step_norm}});
    return {{"records", rows}, {"threshold", threshold}, {"divergent_sites", divergent_sites}, {"divergent", divergent}};
}

BarrierScan unbounded_barrier_scan(const PotentialSpec& V, const std::vector<double>& E_grid, std::int64_t n_max,
                                   double threshold) {
    if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
    if (E_grid.empty()) throw InvalidArgument("empty energy grid");
    BarrierScan s;
    s.threshold = threshold;
    double best = -1.0;
    for (std::int64_t k = 1; k <= n_max; ++k) {
        double v = V.eval(k);
        if (std::abs(v) <= best) continue;
        best = std::abs(v);
        BarrierSite site{k, best, std::numeric_limits<double>::infinity()};
        for (double E : E_grid) site.min_step_norm = std::min(site.min_step_norm, opnorm(step_matrix(v, E)));
        s.records.push_back(site);
        if (site.min_step_norm > threshold) ++s.divergent_sites;
    }
    s.divergent = s.divergent_sites > 0;
    return s;
}

nlohmann::json SparseEvidence::to_json() const {
    auto bl = nlohmann::json::array();
    for (const auto& b : blocks)
        bl.push_back({{"block", b.block},
                      {"start", b.start},
                      {"end", b.end},
                      {"threshold", b.threshold},
                      {"fraction_at_least_j", b.fraction_at_least_j},
                      {"log_norms", b.log_norms}});
    return {{"E_grid", E_grid}, {"blocks", bl}, {"potential_fingerprint", fingerprint}};
}

SparseEvidence sparse_block_evidence(double alpha, std::uint64_t seed, const std::vector<std::int64_t>& gaps,
                                     const std::vector<std::int64_t>& blocks, const std::vector<double>& E_grid,
                                     const std::vector<double>& thresholds, int threads) {
    if (!(alpha < 0.5)) throw InvalidArgument("alpha must be below 1/2");
    if (!thresholds.empty() && thresholds.size() != blocks.size())
        throw InvalidArgument("one threshold per block");
    auto V = sparse_composite(alpha, seed, gaps, blocks);
    if (E_grid.empty()) throw InvalidArgument("empty energy grid");
    SparseEvidence ev;
    ev.E_grid = E_grid;
    ev.fingerprint = V.fingerprint();
    std::int64_t pos = 0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        BlockEvidence b;
        b.block = static_cast<std::int64_t>(j + 1);
        b.start = pos + gaps[j] + 1;
        b.end = pos + gaps[j] + blocks[j];
        pos = b.end;
        b.log_norms.assign(E_grid.size(), 0.0);
        if (blocks[j] > 0) {
            std::vector<double> v;
            for (std::int64_t k = b.start; k <= b.end; ++k) v.push_back(V.eval(k));
            parallel_for(E_grid.size(), threads, [&](std::size_t i) {
                ScaledProduct T;
                for (double x : v) T.push(step_matrix(x, E_grid[i]));
                b.log_norms[i] = T.log_norm();
            });
        }
        b.threshold = thresholds.empty() ? static_cast<double>(b.block) : thresholds[j];
        double lj = std::log(b.threshold);
        std::size_t hits = 0;
        for (double x : b.log_norms) hits += x >= lj;
        b.fraction_at_least_j = static_cast<double>(hits) / static_cast<double>(E_grid.size());
        ev.blocks.push_back(std::move(b));
    }
    return ev;
}

}  // namespace tml
