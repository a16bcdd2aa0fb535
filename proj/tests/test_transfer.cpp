#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tml/errors.hpp"
#include "tml/transfer.hpp"

using namespace tml;

namespace {

double rel_diff(const Mat2& a, const Mat2& b) { return opnorm(a - b) / std::max(opnorm(b), 1e-300); }

bool same(const Mat2& a, const Mat2& b, double tol) { return max_abs_entry(a - b) <= tol; }

}  // namespace

TEST_CASE("step matrix entries") {
    CHECK(same(step_matrix(0.0, 2.0), {2, -1, 1, 0}, 0.0));
    CHECK(same(step_matrix(1.7, 1.7), {0, -1, 1, 0}, 0.0));
    CHECK(same(step_matrix(5.0, 2.0), {-3, -1, 1, 0}, 0.0));
    CHECK(step_matrix(3.0, 0.5).det() == 1.0);
    CHECK_THROWS_AS(step_matrix(NAN, 0.0), DomainError);
    CHECK_THROWS_AS(step_matrix(0.0, INFINITY), DomainError);
    CHECK(same(step_matrix(0.3, 1.1) * inverse_step_matrix(0.3, 1.1), Mat2::identity(), 1e-15));
}

TEST_CASE("operator norm against SVD and power iteration") {
    CHECK(opnorm(Mat2::identity()) == doctest::Approx(1.0).epsilon(1e-15));
    Mat2 a{2, -1, 1, 0};
    CHECK(opnorm(a) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
    CHECK(opnorm(a) == doctest::Approx(oracle::power_iteration_norm(a)).epsilon(1e-12));
    Mat2 ex{11, -10, 10, -9};
    CHECK(opnorm(ex) == doctest::Approx(oracle::svd_norm(ex)).epsilon(1e-13));
    // rank-one leading part n (1,1)(1,-1)^T has norm 2n
    CHECK(std::abs(opnorm(ex) - 2.0 * 10) <= 0.1);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
        Mat2 m{u(rng), u(rng), u(rng), u(rng)};
        CHECK(opnorm(m) == doctest::Approx(oracle::svd_norm(m)).epsilon(1e-12));
        double d = m.det();
        if (d > 0.1) {
            Mat2 unimod = m * (1.0 / std::sqrt(d));
            CHECK(opnorm(unimod) >= 1.0 - 1e-14);
            CHECK(std::abs(opnorm(unimod) - opnorm(unimod.adjugate())) <= 1e-10 * opnorm(unimod));
        }
    }
}

TEST_CASE("transfer matrix closed forms") {
    auto V0 = zero_potential();
    auto T = transfer(V0, 2.0, 10, 0);
    CHECK(same(T.value(), {11, -10, 10, -9}, 1e-12));
    auto I = transfer(random_decay(0.0, 3), 0.7, 7, 7);
    CHECK(same(I.value(), Mat2::identity(), 0.0));
    CHECK(I.log_scale() == 0.0);
    auto R = transfer(V0, 0.0, 4, 0);
    CHECK(same(R.value(), Mat2::identity(), 1e-15));
    for (std::int64_t n : {1, 5, 50, 500}) {
        auto Tn = transfer(V0, 2.0, n, 0);
        double nn = static_cast<double>(n);
        CHECK(same(Tn.mat() * std::exp(Tn.log_scale()), {nn + 1, -nn, nn, 1 - nn}, 1e-9 * nn));
    }
    CHECK_THROWS_AS(transfer(V0, 1.0, -1, 0), DomainError);
}

TEST_CASE("scaled product matches extended-precision naive product") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto V = random_decay(0.0, seed, 1.5);
        for (double E : {-2.5, -0.3, 0.0, 1.1, 2.9}) {
            for (std::int64_t n : {1, 2, 17, 120}) {
                auto T = transfer(V, E, n, 0);
                auto ref = oracle::to_mat(oracle::naive_transfer(V, E, n, 0));
                CHECK(rel_diff(T.value(), ref) <= 1e-11);
                CHECK(T.log_norm() == doctest::Approx(std::log(oracle::svd_norm(ref))).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("unimodularity over long random products") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ue(-3.5, 3.5);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto V = random_decay(0.0, seed, 1.0);
        for (int k = 0; k < 5; ++k) {
            double E = ue(rng);
            ScaledProduct T;
            for (std::int64_t n = 1; n <= 20000; ++n) {
                T.push(step_matrix(V.eval(n), E));
                if (n % 1000 == 0) {
                    REQUIRE(std::abs(T.descaled_det() - 1.0) <= 1e-9);
                    REQUIRE(opnorm(T.mat()) == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
            CHECK(T.log_scale() > 0.0);
        }
    }
}

TEST_CASE("composition law and inverse symmetry") {
    std::mt19937_64 rng(5);
    auto V = random_decay(0.0, 99, 1.0, Domain::half_line);
    std::uniform_int_distribution<std::int64_t> ui(0, 1000);
    std::uniform_real_distribution<double> ue(-2.5, 2.5);
    for (int trial = 0; trial < 60; ++trial) {
        std::int64_t a = ui(rng), b = ui(rng), c = ui(rng);
        std::int64_t m = std::min({a, b, c}), n = std::max({a, b, c}), k = a + b + c - m - n;
        double E = ue(rng);
        auto Tnk = transfer(V, E, n, k), Tkm = transfer(V, E, k, m), Tnm = transfer(V, E, n, m);
        auto C = Tnk * Tkm;
        // compare on the common scale of T(n, m)
        double shift = std::exp(C.log_scale() - Tnm.log_scale());
        Mat2 diff = C.mat() * shift - Tnm.mat();
        CHECK(opnorm(diff) <= 1e-8);
        auto inv = transfer(V, E, m, n);
        CHECK(std::abs(inv.log_norm() - Tnm.log_norm()) <= 1e-10 * std::max(1.0, Tnm.log_norm()));
        auto inv2 = Tnm.inverse();
        CHECK(opnorm(inv2.mat() - inv.mat()) <= 1e-8);
    }
}

TEST_CASE("solutions from boundary angles") {
    auto V0 = zero_potential();
    auto uD = solution(V0, 2.0, std::numbers::pi / 2, 50);
    CHECK(std::abs(uD.value(0)) <= 1e-15);
    CHECK(uD.value(1) == 1.0);
    for (int n = 0; n <= 51; ++n) CHECK(uD.value(n) == doctest::Approx(n).epsilon(1e-12));
    auto uN = solution(V0, 2.0, 0.0, 10);
    CHECK(uN.value(0) == 1.0);
    CHECK(uN.value(1) == 0.0);

    auto V = random_decay(0.3, 4, 2.0);
    for (double theta : {0.0, 0.4, 1.3, 2.9}) {
        for (double E : {-1.0, 0.5, 3.0}) {
            auto u = solution(V, E, theta, 2000);
            for (std::int64_t n = 1; n <= 2000; ++n) {
                if (u.log_abs(n + 1) > 650) break;
                double lhs = u.value(n + 1) + u.value(n - 1) + V.eval(n) * u.value(n);
                double scale = std::abs(u.value(n + 1)) + std::abs(u.value(n - 1)) + std::abs(E * u.value(n));
                REQUIRE(std::abs(lhs - E * u.value(n)) <= 1e-8 * scale);
            }
            // recovery through the transfer matrix
            for (std::int64_t n : {1, 10, 333, 1000}) {
                auto phi = transfer(V, E, n, 0).apply(boundary_vector(theta));
                auto scaled = [&](std::int64_t k) {
                    return std::copysign(std::exp(u.log_abs(k) - phi.log_scale), u.value(k));
                };
                double m = std::max(std::abs(phi.v.x), std::abs(phi.v.y));
                CHECK(std::abs(phi.v.x - scaled(n + 1)) <= 1e-8 * m);
                CHECK(std::abs(phi.v.y - scaled(n)) <= 1e-8 * m);
            }
        }
    }
}

TEST_CASE("solutions survive exponential growth") {
    auto V = constant_potential(0.0);
    auto u = solution(V, 3.0, std::numbers::pi / 2, 3000);
    double x = (3.0 + std::sqrt(5.0)) / 2.0;
    // u_D(n) = (x^n - x^-n)/(x - 1/x)
    for (std::int64_t n : {100, 1000, 3000}) {
        double expect = n * std::log(x) - std::log(x - 1 / x);
        CHECK(u.log_abs(n) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("wronskian conventions") {
    auto V = random_decay(0.5, 17, 1.0);
    double E = 0.8;
    auto uD = solution(V, E, std::numbers::pi / 2, 500);
    auto uN = solution(V, E, 0.0, 500);
    for (std::int64_t n : {0, 1, 7, 100, 499}) {
        CHECK(wronskian(uD, uN, n) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(wronskian(uD, uD, n) == 0.0);
    }
    for (int k = 0; k < 16; ++k) {
        double th = k * std::numbers::pi / 16;
        auto phi = solution(V, E, th, 300);
        auto psi = solution_from(V, E, {std::cos(th), -std::sin(th)}, 300);
        for (std::int64_t n : {0, 5, 299}) {
            double w = wronskian(phi, psi, n);
            CHECK(w == doctest::Approx(-1.0).epsilon(1e-8));
            Vec2 P{phi.value(n + 1), phi.value(n)}, Q{psi.value(n + 1), psi.value(n)};
            CHECK(symplectic_form(P, Q) == doctest::Approx(w).epsilon(1e-12));
        }
    }
    auto other = solution(V, E + 0.1, 0.0, 10);
    CHECK_THROWS_AS(wronskian(uD, other, 1), InvalidArgument);
    auto otherV = solution(random_decay(0.5, 18, 1.0), E, 0.0, 10);
    CHECK_THROWS_AS(wronskian(uD, otherV, 1), InvalidArgument);
}

TEST_CASE("complementary solutions are never both small") {
    auto V = random_decay(0.0, 23, 1.0);
    for (double E : {-1.5, 0.2, 2.4}) {
        for (int k = 0; k < 32; ++k) {
            double th = k * std::numbers::pi / 32;
            ScaledProduct T;
            for (std::int64_t n = 1; n <= 1000; ++n) {
                T.push(step_matrix(V.eval(n), E));
                double a = T.log_norm_applied(boundary_vector(th));
                double b = T.log_norm_applied({std::cos(th), -std::sin(th)});
                REQUIRE(a + b >= std::log1p(-1e-8));
            }
        }
    }
}

TEST_CASE("norm trajectory") {
    auto V0 = zero_potential();
    auto tr = norm_trajectory(V0, 2.0, 1000);
    CHECK(std::abs(tr[999] - std::log(2.0 * 1000)) <= 0.01);
    auto rot = norm_trajectory(V0, 0.0, 400);
    for (std::size_t k = 3; k < rot.size(); k += 4) CHECK(rot[k] == 0.0);
    auto V = random_decay(0.2, 8, 1.0);
    auto tv = norm_trajectory(V, 0.9, 600);
    for (std::int64_t n : {1, 50, 300, 600}) {
        double ref = std::log(oracle::svd_norm(oracle::to_mat(oracle::naive_transfer(V, 0.9, n, 0))));
        CHECK(tv[static_cast<std::size_t>(n - 1)] == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("power-law growth exponents of inverse-square potentials") {
    for (auto [c0, expect] : {std::pair{0.2, 0.5 + std::sqrt(0.05)}, std::pair{-0.75, 1.5}}) {
        auto V = power_decay(c0, 2.0);
        auto tr = norm_trajectory(V, 2.0, 100000);
        std::vector<double> x, y;
        for (std::int64_t n = 1000; n <= 100000; n += 97) {
            x.push_back(std::log(static_cast<double>(n)));
            y.push_back(tr[static_cast<std::size_t>(n - 1)]);
        }
        CHECK(ls_slope(x, y) == doctest::Approx(expect).epsilon(0.02 / expect));
    }
}
