#include "tml/ruelle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "tml/errors.hpp"
#include "tml/scaled_product.hpp"
#include "tml/transfer.hpp"

namespace tml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
// a few ulps of an angle in [0, pi)
constexpr double kAngleRounding = 8.0 * std::numeric_limits<double>::epsilon();

double lse(double a, double b) {
    if (a == -kNegInf || b == -kNegInf) return -kNegInf;
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log terms x_k, k = 0..K-1, standing for n = k + first
SumDiagnostic diagnose(const std::vector<double>& x, std::int64_t first) {
    SumDiagnostic d;
    d.log_total = d.log_last_block = d.log_prev_block = kNegInf;
    std::int64_t last = first + static_cast<std::int64_t>(x.size());  // one past
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::int64_t n = first + static_cast<std::int64_t>(k);
        d.log_total = lse(d.log_total, x[k]);
        if (2 * n >= last)
            d.log_last_block = lse(d.log_last_block, x[k]);
        else if (4 * n >= last)
            d.log_prev_block = lse(d.log_prev_block, x[k]);
    }
    if (d.log_total == -kNegInf) {
        d.block_ratio = d.log_tail = -kNegInf;
        return d;
    }
    d.block_ratio = std::exp(d.log_last_block - d.log_prev_block);
    if (d.log_last_block == kNegInf)
        d.log_tail = kNegInf;
    else if (d.block_ratio < 1.0)
        d.log_tail = d.log_last_block + std::log(d.block_ratio) - std::log1p(-d.block_ratio);
    else
        d.log_tail = std::numeric_limits<double>::infinity();
    d.converged = d.log_total != kNegInf ? d.log_last_block <= d.log_total + std::log(1e-3) : true;
    return d;
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

std::vector<std::int64_t> record_sites(std::int64_t L) {
    std::vector<std::int64_t> s;
    for (std::int64_t n = 1; n <= std::min<std::int64_t>(L, 100); ++n) s.push_back(n);
    for (double x = 2.0; x < std::log10(double(L)); x += 1.0 / 200.0) {
        auto n = static_cast<std::int64_t>(std::llround(std::pow(10.0, x)));
        if (n > s.back() && n < L) s.push_back(n);
    }
    if (s.back() != L) s.push_back(L);
    return s;
}

// suffix[k] = log sum_{j>=k} x_j
std::vector<double> log_suffix(const std::vector<double>& x) {
    std::vector<double> s(x.size() + 1, kNegInf);
    for (std::size_t k = x.size(); k-- > 0;) s[k] = lse(s[k + 1], x[k]);
    return s;
}

std::vector<double> angle_terms(const AngleTrace& tr) {  // n = 1..L-1
    std::vector<double> x;
    for (std::int64_t n = 1; n < tr.size(); ++n)
        x.push_back(2.0 * tr.log_a[static_cast<std::size_t>(n)] - 2.0 * tr.log_t[static_cast<std::size_t>(n - 1)]);
    return x;
}

}  // namespace

void AngleTrace::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "n,theta_n,log_t_n\n";
    for (std::size_t i = 0; i < theta.size(); ++i) os << i + 1 << ',' << theta[i] << ',' << log_t[i] << '\n';
}

double projective_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

AngleTrace angle_trace(const StepProvider& step, std::int64_t L) {
    if (L < 1) throw InvalidArgument("angle trace needs L >= 1");
    AngleTrace tr;
    auto n_sz = static_cast<std::size_t>(L);
    tr.theta.reserve(n_sz);
    tr.theta_lifted.reserve(n_sz);
    tr.log_t.reserve(n_sz);
    tr.log_a.reserve(n_sz);
    tr.isotropic.reserve(n_sz);
    ScaledProduct T;
    double prev = 0.0, lifted = 0.0;
    for (std::int64_t n = 1; n <= L; ++n) {
        Mat2 A = step(n);
        if (!A.finite() || std::abs(A.det() - 1.0) > 1e-9) throw InvalidArgument("step matrix is not unimodular");
        T.push(A);
        bool iso = T.log_norm() < 1e-12;
        double th = iso ? prev : T.contracting_angle();
        if (n > 1) {
            double d = th - prev;
            d -= kPi * std::round(d / kPi);
            lifted += d;
        } else {
            lifted = th;
        }
        tr.theta.push_back(th);
        tr.theta_lifted.push_back(lifted);
        tr.log_t.push_back(T.log_norm());
        tr.log_a.push_back(std::log(opnorm(A)));
        tr.isotropic.push_back(iso);
        prev = th;
    }
    return tr;
}

AngleTrace angle_trace(const PotentialSpec& V, double E, std::int64_t L) {
    return angle_trace([&](std::int64_t n) { return step_matrix(V.eval(n), E); }, L);
}

double max_step_angle_ratio(const AngleTrace& tr) {
    double worst = 0.0;
    for (std::int64_t n = 1; n < tr.size(); ++n) {
        auto i = static_cast<std::size_t>(n - 1);
        if (tr.isotropic[i] || tr.isotropic[i + 1]) continue;
        double d = std::max(0.0, projective_distance(tr.theta[i], tr.theta[i + 1]) - kAngleRounding);
        double bound = 0.5 * kPi * std::exp(2.0 * tr.log_a[i + 1] - 2.0 * tr.log_t[i]);
        worst = std::max(worst, d / bound);
    }
    return worst;
}

nlohmann::json SumDiagnostic::to_json() const {
    return {{"log_total", num(log_total)},   {"log_last_block", num(log_last_block)},
            {"log_prev_block", num(log_prev_block)}, {"block_ratio", num(block_ratio)},
            {"log_tail", num(log_tail)},     {"converged", converged}};
}

nlohmann::json RuelleSums::to_json() const {
    return {{"angle_sum", angle_sum.to_json()},
            {"l2_sum", l2_sum.to_json()},
            {"inverse_norm_sum", inverse_norm_sum.to_json()},
            {"note", note}};
}

RuelleSums ruelle_condition(const AngleTrace& tr) {
    if (tr.size() < 2) throw InvalidArgument("ruelle sums need a trace of length >= 2");
    RuelleSums s;
    auto x = angle_terms(tr);
    s.angle_sum = diagnose(x, 1);

    // inner tails sum_{n>=m}, with the angle-sum remainder added
    auto suf = log_suffix(x);
    std::vector<double> l2(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        l2[k] = 2.0 * tr.log_t[k] + 2.0 * lse(suf[k], s.angle_sum.log_tail);
    s.l2_sum = diagnose(l2, 1);

    std::vector<double> inv(tr.log_t.size());
    for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = -2.0 * tr.log_t[k];
    s.inverse_norm_sum = diagnose(inv, 1);
    if (!s.inverse_norm_sum.converged)
        s.note = "sum of ||T(n)||^-2 does not settle: no solution is square summable at infinity";
    else
        s.note = "sum of ||T(n)||^-2 settles: a strongly subordinate solution exists for bounded V";
    return s;
}

double log_norm_along(const AngleTrace& tr, std::int64_t n, double theta) {
    if (n < 1 || n > tr.size()) throw InvalidArgument("n outside the trace");
    auto i = static_cast<std::size_t>(n - 1);
    double d = theta - tr.theta[i];
    double s = std::sin(d), c = std::cos(d), lt = tr.log_t[i];
    double a = s == 0.0 ? kNegInf : 2.0 * lt + 2.0 * std::log(std::abs(s));
    double b = c == 0.0 ? kNegInf : -2.0 * lt + 2.0 * std::log(std::abs(c));
    return 0.5 * lse(a, b);
}

double RuelleResult::worst_tail_excess() const {
    double w = -std::numeric_limits<double>::infinity();
    for (const auto& r : records)
        if (r.n >= n0) w = std::max(w, r.angle_gap - r.tail_bound);
    return w;
}

nlohmann::json RuelleResult::to_json() const {
    auto rec = nlohmann::json::array();
    for (const auto& r : records)
        rec.push_back({{"n", r.n},
                       {"log_u", r.log_u},
                       {"log_v", r.log_v},
                       {"tail_bound", num(r.tail_bound)},
                       {"angle_gap", r.angle_gap}});
    return {{"theta_infty", theta_infty}, {"radius", num(radius)}, {"theta_last", theta_last},
            {"converged", converged},     {"n0", n0},              {"reason", reason},
            {"sums", sums.to_json()},     {"solution_l2", solution_l2.to_json()},
            {"growth_records", rec}};
}

RuelleResult u_infinity(const AngleTrace& tr) {
    RuelleResult r;
    r.sums = ruelle_condition(tr);
    std::int64_t L = tr.size();
    auto last = static_cast<std::size_t>(L - 1);
    r.theta_last = tr.theta[last];
    const auto& A = r.sums.angle_sum;
    r.radius = 0.5 * kPi * std::exp(A.log_tail);
    r.converged = A.converged && std::isfinite(A.log_tail) && !tr.isotropic[last];
    if (tr.isotropic[last])
        r.reason = "isotropic product: the contracting direction is undefined";
    else if (!A.converged)
        r.reason = "angle sum has not settled (last dyadic block above 1e-3 of the total)";

    // geometric continuation of the lifted angle over the last two dyadic blocks
    double th = tr.theta_lifted[last];
    if (r.converged && L >= 8) {
        double t4 = tr.theta_lifted[static_cast<std::size_t>(L / 4 - 1)];
        double t2 = tr.theta_lifted[static_cast<std::size_t>(L / 2 - 1)];
        double d1 = t2 - t4, d2 = th - t2;
        if (d1 != 0.0 && d2 / d1 > 0.0 && d2 / d1 < 1.0) {
            double q = d2 / d1;
            th += std::clamp(d2 * q / (1.0 - q), -r.radius, r.radius);
        }
    }
    double lifted_inf = th;
    r.theta_infty = std::fmod(th, kPi);
    if (r.theta_infty < 0.0) r.theta_infty += kPi;

    std::vector<double> sq(static_cast<std::size_t>(L));
    for (std::int64_t n = 1; n <= L; ++n) sq[static_cast<std::size_t>(n - 1)] = 2.0 * log_norm_along(tr, n, r.theta_infty);
    r.solution_l2 = diagnose(sq, 1);

    auto x = angle_terms(tr);
    auto suf = log_suffix(x);
    for (std::int64_t n : record_sites(L)) {
        auto i = static_cast<std::size_t>(n - 1);
        GrowthRecord g;
        g.n = n;
        g.log_u = log_norm_along(tr, n, r.theta_infty);
        g.log_v = log_norm_along(tr, n, r.theta_infty + 0.5 * kPi);
        g.tail_bound = 0.5 * kPi * std::exp(lse(i < suf.size() ? suf[i] : kNegInf, A.log_tail));
        g.angle_gap = std::abs(tr.theta_lifted[i] - lifted_inf);
        r.records.push_back(g);
    }
    return r;
}

RuelleResult u_infinity(const PotentialSpec& V, double E, std::int64_t L) { return u_infinity(angle_trace(V, E, L)); }

nlohmann::json DecayCheck::to_json() const {
    auto rows_j = nlohmann::json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"n", r.n}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"lhs_upper", r.lhs_upper}, {"margin", r.margin},
                          {"rhs_weighted", r.rhs_weighted}, {"margin_weighted", r.margin_weighted}});
    return {{"rows", rows_j}, {"log_tail", num(log_tail)}, {"pass", pass}, {"pass_weighted", pass_weighted}};
}

DecayCheck bound_state_decay_check(const RuelleResult& r, const AngleTrace& tr, std::int64_t n_lo,
                                   std::int64_t n_hi) {
    if (!r.converged) throw Refusal("u_infinity did not converge: " + r.reason);
    if (n_lo < 1 || n_hi > tr.size() || n_lo > n_hi) throw InvalidArgument("row range outside the trace");
    double amax = *std::max_element(tr.log_a.begin(), tr.log_a.end());
    if (!std::isfinite(amax)) throw Refusal("one-step norms are not bounded along the trace");

    std::vector<double> inv(tr.log_t.size());
    for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = -2.0 * tr.log_t[k];
    auto suf = log_suffix(inv);
    auto wsuf = log_suffix(angle_terms(tr));
    DecayCheck c;
    c.log_tail = r.sums.inverse_norm_sum.log_tail;
    c.pass = c.pass_weighted = true;
    for (const auto& g : r.records) {
        if (g.n < n_lo || g.n > n_hi) continue;
        auto i = static_cast<std::size_t>(g.n - 1);
        double lt = tr.log_t[i];
        double tail = lse(suf[i], c.log_tail);
        double log_rhs = lse(-2.0 * lt, 2.0 * std::log(0.5 * kPi) + 2.0 * lt + 2.0 * tail);
        DecayRow row;
        row.n = g.n;
        row.lhs = std::exp(2.0 * g.log_u);
        row.rhs = std::exp(log_rhs);
        double d = projective_distance(r.theta_infty, tr.theta[i]) + r.radius;
        row.lhs_upper = std::exp(2.0 * lse(2.0 * lt + 2.0 * std::log(std::sin(std::min(d, 0.5 * kPi))),
                                           -2.0 * lt) * 0.5);
        row.margin = -std::expm1(2.0 * g.log_u - log_rhs);
        if (row.margin < -1e-6) c.pass = false;
        double wtail = lse(i < wsuf.size() ? wsuf[i] : kNegInf, r.sums.angle_sum.log_tail);
        double log_w = lse(-2.0 * lt, 2.0 * std::log(0.5 * kPi) + 2.0 * lt + 2.0 * wtail);
        row.rhs_weighted = std::exp(log_w);
        row.margin_weighted = -std::expm1(2.0 * g.log_u - log_w);
        if (row.margin_weighted < -1e-6) c.pass_weighted = false;
        c.rows.push_back(row);
    }
    return c;
}

GrowthExponent growth_exponent(const RuelleResult& r, GrowthModel model, double scale) {
    if (!r.converged) throw Refusal("u_infinity did not converge: " + r.reason);
    if (!(scale > 0.0)) throw InvalidArgument("model scale must be positive");
    if (r.records.empty()) throw InvalidArgument("no growth records");
    GrowthExponent g;
    g.n_hi = r.records.back().n;
    g.n_lo = std::max<std::int64_t>(2, g.n_hi / 10);
    std::vector<double> f, y;
    g.limsup = -std::numeric_limits<double>::infinity();
    g.liminf = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.records) {
        if (rec.n < g.n_lo) continue;
        double fn = scale * (model == GrowthModel::log_n ? std::log(double(rec.n)) : double(rec.n));
        f.push_back(fn);
        y.push_back(rec.log_u);
        g.limsup = std::max(g.limsup, rec.log_u / fn);
        g.liminf = std::min(g.liminf, rec.log_u / fn);
    }
    g.points = f.size();
    if (g.points < 2) throw InvalidArgument("too few records in the last decade");
    g.slope = ls_slope(f, y);
    return g;
}

}  // namespace tml
