#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "tml/errors.hpp"
#include "tml/ruelle.hpp"
#include "tml/transfer.hpp"

using namespace tml;
using std::numbers::pi;

namespace {

const double kGamma = 0.5 + std::sqrt(0.05);  // growth exponent of power_decay(0.2) at E = 2

double ln_norm_naive(const PotentialSpec& V, double E, std::int64_t n, double theta) {
    auto T = oracle::naive_transfer(V, E, n, 0);
    long double c = std::cos(theta), s = std::sin(theta);
    long double x = T[0] * c + T[1] * s, y = T[2] * c + T[3] * s;
    return 0.5 * std::log(static_cast<double>(x * x + y * y));
}

}  // namespace

TEST_CASE("angle trace conventions") {
    auto diag = angle_trace([](std::int64_t) { return Mat2{2.0, 0.0, 0.0, 0.5}; }, 5);
    for (std::int64_t n = 1; n <= 5; ++n) {
        CHECK(std::abs(diag.theta[n - 1] - pi / 2) < 1e-14);
        CHECK(std::abs(diag.log_t[n - 1] - n * std::log(2.0)) < 1e-12);
        CHECK_FALSE(diag.isotropic[n - 1]);
    }

    // a hyperbolic step followed by rotations: the angle is carried through the isotropic-free product,
    // while a pure rotation product is isotropic from the start
    auto rot = angle_trace([](std::int64_t) { return rotation(std::cos(0.4), std::sin(0.4)); }, 6);
    for (std::int64_t n = 1; n <= 6; ++n) CHECK(rot.isotropic[n - 1]);
    auto mixed = angle_trace(
        [](std::int64_t n) { return n <= 2 ? Mat2{3.0, 0.0, 0.0, 1.0 / 3.0} : Mat2{1.0 / 3.0, 0.0, 0.0, 3.0}; }, 4);
    CHECK_FALSE(mixed.isotropic[1]);
    CHECK(mixed.isotropic[3]);  // diag(3,1/3)^2 diag(1/3,3)^2 = I
    CHECK(mixed.theta[3] == mixed.theta[2]);

    CHECK_THROWS_AS(angle_trace([](std::int64_t) { return Mat2{2.0, 0.0, 0.0, 2.0}; }, 3), InvalidArgument);
    CHECK_THROWS_AS(angle_trace(zero_potential(), 0.0, 0), InvalidArgument);

    std::ostringstream os;
    diag.write_csv(os);
    CHECK(os.str().rfind("n,theta_n,log_t_n\n1,", 0) == 0);
}

TEST_CASE("singular-value reconstruction of ||T(n) u||") {
    for (auto V : {power_decay(0.2, 2.0), almost_mathieu(1.2, 0.618, 0.1), random_decay(0.4, 9)}) {
        for (double E : {2.0, 0.4, -1.7}) {
            auto tr = angle_trace(V, E, 300);
            for (std::int64_t n : {1, 7, 60, 300}) {
                for (int p = 0; p < 16; ++p) {
                    double th = pi * p / 16;
                    double a = log_norm_along(tr, n, th), b = ln_norm_naive(V, E, n, th);
                    CHECK(std::abs(std::expm1(2.0 * (a - b))) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("per-step angle increments obey the one-step bound") {
    auto tr = angle_trace(power_decay(0.2, 2.0), 2.0, 100000);
    CHECK(max_step_angle_ratio(tr) <= 1.0 + 1e-8);
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        for (double E : {-2.5, -1.0, 0.3, 1.9}) {
            auto t = angle_trace(random_decay(0.3, seed, 1.5), E, 20000);
            CHECK(max_step_angle_ratio(t) <= 1.0 + 1e-8);
        }
    auto amo = angle_trace(almost_mathieu(3.0, 0.618, 0.2), 0.5, 2000);
    CHECK(max_step_angle_ratio(amo) <= 1.0 + 1e-8);
}

TEST_CASE("summability sums") {
    auto still = ruelle_condition(angle_trace(zero_potential(), 0.0, 1024));
    CHECK_FALSE(still.angle_sum.converged);
    CHECK(std::abs(std::exp(still.angle_sum.log_total) - 1023.0) < 1e-9);
    CHECK(std::abs(std::exp(still.inverse_norm_sum.log_total) - 1024.0) < 1e-9);
    CHECK(still.note.find("no solution") != std::string::npos);

    // free E = 2 against the closed-form norms of [[n+1, -n], [n, 1-n]]
    std::int64_t L = 100000;
    auto edge = ruelle_condition(angle_trace(zero_potential(), 2.0, L));
    double inv = 0.0;
    for (std::int64_t n = 1; n <= L; ++n) {
        double t = oracle::svd_norm(Mat2{double(n + 1), double(-n), double(n), double(1 - n)});
        inv += 1.0 / (t * t);
    }
    CHECK(std::abs(std::exp(edge.inverse_norm_sum.log_total) / inv - 1.0) < 1e-10);
    CHECK(edge.angle_sum.converged);
    CHECK(edge.inverse_norm_sum.converged);
    CHECK_FALSE(edge.l2_sum.converged);
    CHECK(std::abs(edge.angle_sum.block_ratio - 0.5) < 1e-3);

    // growth exponent 3/2: the square-summability sum still does not settle
    auto crit = ruelle_condition(angle_trace(power_decay(-0.75, 2.0), 2.0, L));
    CHECK(crit.angle_sum.converged);
    CHECK_FALSE(crit.l2_sum.converged);

    CHECK_THROWS_AS(ruelle_condition(angle_trace(zero_potential(), 2.0, 1)), InvalidArgument);
}

TEST_CASE("decaying direction for the free case at the band edge") {
    auto tr = angle_trace(zero_potential(), 2.0, 100000);
    auto r = u_infinity(tr);
    REQUIRE(r.converged);
    // the constant solution u = (1, 1)/sqrt 2
    CHECK(std::abs(r.theta_infty - pi / 4) < 1e-6);
    CHECK(r.worst_tail_excess() <= 0.0);
    std::vector<double> x, y;
    for (const auto& g : r.records) {
        CHECK(std::abs(g.log_u) < 1e-6);
        if (g.n >= 1000) {
            x.push_back(std::log(double(g.n)));
            y.push_back(g.log_u - g.log_v);
        }
    }
    CHECK(std::abs(ls_slope(x, y) + 1.0) < 0.01);
    auto ge = growth_exponent(r, GrowthModel::log_n, 1.0);
    CHECK(ge.limsup <= 0.05);
    CHECK_FALSE(r.solution_l2.converged);
}

TEST_CASE("decaying direction for power decay") {
    auto tr = angle_trace(power_decay(0.2, 2.0), 2.0, 100000);
    auto r = u_infinity(tr);
    REQUIRE(r.converged);
    CHECK(r.worst_tail_excess() <= 0.0);
    auto ge = growth_exponent(r, GrowthModel::log_n);
    CHECK(ge.slope >= -kGamma);
    CHECK(ge.slope <= 1.0 - kGamma + 0.01);
    CHECK(ge.limsup <= 1.0 - kGamma + 0.05);
    CHECK(ge.liminf >= -kGamma - 0.05);

    // large-n comparison with the perpendicular direction and the quadratic angle bound
    for (const auto& g : r.records) {
        if (g.n < 1000) continue;
        double lt = tr.log_t[g.n - 1];
        CHECK(2.0 * g.log_v >= std::log(0.5) + 2.0 * lt);
        double gap = projective_distance(tr.theta[g.n - 1], r.theta_infty);
        CHECK(std::exp(2.0 * g.log_u) <= std::exp(2.0 * lt) * gap * gap + std::exp(-2.0 * lt) + 1e-12);
    }
    // the ratio against the perpendicular solution keeps falling along dyadic n
    double prev = 1.0;
    for (const auto& g : r.records)
        if (g.n >= 16 && (g.n & (g.n - 1)) == 0) {
            double ratio = std::exp(g.log_u - g.log_v);
            CHECK(ratio < prev);
            prev = ratio;
        }
}

TEST_CASE("isotropic products are not converged") {
    auto tr = angle_trace(zero_potential(), 0.0, 1000);
    auto r = u_infinity(tr);
    CHECK_FALSE(r.converged);
    CHECK(r.reason.find("isotropic") != std::string::npos);
    CHECK_THROWS_AS(growth_exponent(r, GrowthModel::log_n), Refusal);
    CHECK_THROWS_AS(bound_state_decay_check(r, tr, 1, 100), Refusal);
    auto j = r.to_json();
    CHECK(j["converged"] == false);
    CHECK(j["radius"].is_null());
}

TEST_CASE("exponential decay against a linear model") {
    const double g0 = 0.5, c = std::cos(0.3), s = std::sin(0.3);
    Mat2 R = rotation(c, s);
    Mat2 A = R * Mat2{std::exp(g0), 0.0, 0.0, std::exp(-g0)} * R.transpose();
    auto tr = angle_trace([&](std::int64_t) { return A; }, 32);
    auto r = u_infinity(tr);
    REQUIRE(r.converged);
    CHECK(std::abs(r.theta_infty - (0.3 + pi / 2)) < 1e-12);
    auto ge = growth_exponent(r, GrowthModel::linear_n, g0);
    CHECK(std::abs(ge.slope + 1.0) < 0.05);
    CHECK(ge.n_hi == 32);
}

TEST_CASE("pointwise bound on the decaying solution") {
    // free case at E = 2: the displayed bound tends to pi^2/16 while ||T(n) u_inf||^2 = 1
    auto tr = angle_trace(zero_potential(), 2.0, 100000);
    auto r = u_infinity(tr);
    auto c = bound_state_decay_check(r, tr, 100, 10000);
    REQUIRE_FALSE(c.rows.empty());
    CHECK_FALSE(c.pass);
    CHECK(c.pass_weighted);
    const auto& last = c.rows.back();
    CHECK(std::abs(last.lhs - 1.0) < 1e-6);
    CHECK(std::abs(last.rhs - pi * pi / 16) < 1e-3);
    for (const auto& row : c.rows) CHECK(row.lhs_upper >= row.lhs * (1 - 1e-12));

    auto pd = angle_trace(power_decay(0.2, 2.0), 2.0, 100000);
    auto rp = u_infinity(pd);
    auto cp = bound_state_decay_check(rp, pd, 100, 10000);
    CHECK(cp.pass_weighted);
    for (const auto& row : cp.rows) CHECK(row.margin_weighted > 0.0);
    CHECK(cp.to_json()["rows"].size() == cp.rows.size());
    CHECK_THROWS_AS(bound_state_decay_check(rp, pd, 10, 200000), InvalidArgument);
}

TEST_CASE("divergent inverse-norm sums never come with a square-summable solution") {
    std::vector<std::pair<PotentialSpec, double>> runs = {
        {zero_potential(), 0.0},         {zero_potential(), 1.0},         {zero_potential(), 2.0},
        {zero_potential(), 2.5},         {power_decay(0.2, 2.0), 2.0},    {power_decay(-0.75, 2.0), 2.0},
        {power_decay(0.1, 2.0), 2.0},    {almost_mathieu(0.5, 0.618, 0.0), 0.3},
        {almost_mathieu(3.0, 0.618, 0.0), 0.3}, {random_decay(0.3, 4), 0.5}, {random_decay(0.8, 4), -1.0}};
    for (const auto& [V, E] : runs) {
        auto r = u_infinity(V, E, 20000);
        if (!r.sums.inverse_norm_sum.converged) CHECK_FALSE((r.converged && r.solution_l2.converged));
    }
}
