#include "tml/ac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tml/errors.hpp"
#include "tml/scaled_product.hpp"
#include "tml/spectral.hpp"
#include "tml/transfer.hpp"

namespace tml {

namespace {

// log(exp(a) + exp(b))
double lse(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::int64_t> checked_schedule(std::int64_t L_max, const std::vector<std::int64_t>& schedule) {
    if (L_max < 2) throw InvalidArgument("L_max must be at least 2");
    std::vector<std::int64_t> s = schedule.empty() ? dyadic_schedule(L_max) : schedule;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.front() < 1 || s.back() > L_max) throw InvalidArgument("schedule outside [1, L_max]");
    return s;
}

double safe_exp(double x) { return x > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(x); }

}  // namespace

std::vector<std::int64_t> dyadic_schedule(std::int64_t L_max) {
    if (L_max < 2) throw InvalidArgument("L_max must be at least 2");
    std::vector<std::int64_t> s;
    for (std::int64_t L = 2; L <= L_max; L *= 2) s.push_back(L);
    if (s.back() != L_max) s.push_back(L_max);
    return s;
}

void CesaroTrace::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "E,L,G_L\n";
    for (std::size_t i = 0; i < L_values.size(); ++i) os << E << ',' << L_values[i] << ',' << safe_exp(log_G[i]) << '\n';
}

CesaroTrace cesaro_trace(const PotentialSpec& V, double E, std::int64_t L_max,
                         const std::vector<std::int64_t>& schedule) {
    CesaroTrace t;
    t.E = E;
    t.L_values = checked_schedule(L_max, schedule);
    double acc = kNegInf;
    std::size_t j = 0;
    walk_transfer(V, E, t.L_values.back(), [&](std::int64_t n, const ScaledProduct& T) {
        acc = lse(acc, 2.0 * T.log_norm());
        if (n == t.L_values[j]) {
            t.log_G.push_back(acc - std::log(static_cast<double>(n)));
            ++j;
        }
    });
    return t;
}

double log_liminf_estimate(const CesaroTrace& t) {
    if (t.log_G.empty()) throw InvalidArgument("empty trace");
    std::size_t start = t.log_G.size() / 2;
    return *std::min_element(t.log_G.begin() + static_cast<std::ptrdiff_t>(start), t.log_G.end());
}

double liminf_estimate(const CesaroTrace& t) { return safe_exp(log_liminf_estimate(t)); }

std::vector<double> window_norms(const PotentialSpec& V, double E,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (auto [m, k] : pairs) out.push_back(transfer(V, E, m, k).log_norm());
    return out;
}

SubordinacyTrace subordinacy_trace(const PotentialSpec& V, double E, double theta, std::int64_t L_max,
                                   const std::vector<std::int64_t>& schedule) {
    SubordinacyTrace t;
    t.E = E;
    t.theta = normalize_angle(theta);
    t.L_values = checked_schedule(L_max, schedule);
    Vec2 a = boundary_vector(theta), b{std::cos(theta), -std::sin(theta)};
    // T(n) applied to the initial data is (u(n+1), u(n)); log u(n+1)^2
    auto lead = [](const ScaledVec& x) {
        return x.v.x == 0.0 ? kNegInf : 2.0 * (std::log(std::abs(x.v.x)) + x.log_scale);
    };
    double su = 2.0 * std::log(std::abs(a.x)), sv = 2.0 * std::log(std::abs(b.x));  // n = 1
    std::size_t j = 0;
    if (t.L_values[0] == 1) {
        t.log_ratio.push_back(su - sv);
        ++j;
    }
    walk_transfer(V, E, t.L_values.back() - 1, [&](std::int64_t n, const ScaledProduct& T) {
        su = lse(su, lead(T.apply(a)));
        sv = lse(sv, lead(T.apply(b)));
        if (j < t.L_values.size() && n + 1 == t.L_values[j]) {
            t.log_ratio.push_back(su - sv);
            ++j;
        }
    });
    return t;
}

BoundCheck ratio_bound_check(const PotentialSpec& V, double E, double theta, std::int64_t L) {
    if (L < 1) throw InvalidArgument("L must be at least 1");
    Vec2 a = boundary_vector(theta), b{std::cos(theta), -std::sin(theta)};
    double sphi = kNegInf, spsi = kNegInf, sT = kNegInf;
    walk_transfer(V, E, L, [&](std::int64_t, const ScaledProduct& T) {
        sphi = lse(sphi, 2.0 * T.log_norm_applied(a));
        spsi = lse(spsi, 2.0 * T.log_norm_applied(b));
        sT = lse(sT, 2.0 * T.log_norm());
    });
    BoundCheck r;
    r.log_lhs = spsi - sphi;
    r.log_rhs = 2.0 * (sT - std::log(static_cast<double>(L)));
    r.lhs = safe_exp(r.log_lhs);
    r.rhs = safe_exp(r.log_rhs);
    r.holds = r.log_lhs <= r.log_rhs + std::log1p(1e-8);
    return r;
}

BoundCheck m_imag_bound_check(const PotentialSpec& V, double E, std::int64_t L) {
    if (L < 1) throw InvalidArgument("L must be at least 1");
    double eps = 1.0 / static_cast<double>(L);
    double im = m_function(V, {E, eps}, Boundary::dirichlet).imag();
    double s = 0.0;  // ||T(0)|| = 1
    walk_transfer(V, E, L + 1, [&](std::int64_t, const ScaledProduct& T) { s = lse(s, 2.0 * T.log_norm()); });
    BoundCheck r;
    r.log_lhs = std::log(im);
    r.log_rhs = std::log(5.0 + std::sqrt(24.0)) + s - std::log(static_cast<double>(L));
    r.lhs = im;
    r.rhs = safe_exp(r.log_rhs);
    r.holds = r.log_lhs <= r.log_rhs + std::log1p(1e-8);
    return r;
}

GrowthConstant log_growth_constant_scan(const PotentialSpec& V, double E, double delta, std::int64_t L_max) {
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (L_max < 4) throw InvalidArgument("L_max must be at least 4");
    GrowthConstant g;
    double acc = kNegInf, best = kNegInf;
    walk_transfer(V, E, L_max, [&](std::int64_t n, const ScaledProduct& T) {
        acc = lse(acc, 2.0 * T.log_norm());
        if (n < 2) return;
        double ln = std::log(static_cast<double>(n));
        double v = acc - ln - (1.0 + delta) * std::log(ln);
        if (v > best) {
            best = v;
            g.argmax = n;
        }
    });
    g.C = safe_exp(best);
    return g;
}

double lyapunov_estimate(const PotentialSpec& V, double E, std::int64_t L) {
    if (L < 1) throw InvalidArgument("L must be at least 1");
    return transfer(V, E, L, 0).log_norm() / static_cast<double>(L);
}

}  // namespace tml
