#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "tml/errors.hpp"
#include "tml/potential.hpp"

using namespace tml;

TEST_CASE("family evaluations") {
    CHECK(power_decay(0.2, 2.0).eval(2) == doctest::Approx(0.05).epsilon(1e-15));
    double golden = (std::sqrt(5.0) - 1) / 2;
    CHECK(almost_mathieu(3.0, golden, 0.0).eval(0) == 3.0);
    CHECK(cos_power(1.0, 1.5).eval(4) == doctest::Approx(std::cos(8.0)).epsilon(1e-14));
    CHECK(cos_power(1.0, 1.5).eval(4) == doctest::Approx(-0.1455).epsilon(1e-3));
    CHECK(constant_potential(2.5).eval(10) == 2.5);
    CHECK(zero_potential(Domain::whole_line).eval(-4) == 0.0);
    auto per = periodic_potential({1.0, 2.0, 3.0}, Domain::whole_line);
    CHECK(per.eval(1) == 1.0);
    CHECK(per.eval(3) == 3.0);
    CHECK(per.eval(4) == 1.0);
    CHECK(per.eval(0) == 3.0);
    CHECK(per.eval(-2) == 1.0);
    CHECK_THROWS_AS(zero_potential().eval(-1), DomainError);
    auto sh = shifted(cos_power(1.0, 1.5), 3);
    CHECK(sh.eval(1) == cos_power(1.0, 1.5).eval(4));
}

TEST_CASE("cos_power keeps absolute phase accuracy at large n") {
    // n = 10^7, n^1.5 = 10^10.5; compare with an exact decimal reduction of 10^10.5 mod 2 pi
    auto V = cos_power(1.0, 1.5);
    std::int64_t n = 10000000;
    long double x = std::pow(10.0L, 10.5L);
    long double r = std::fmod(x, 6.283185307179586476925286766559005768L);
    CHECK(V.eval(n) == doctest::Approx(std::cos(static_cast<double>(r))).epsilon(1e-8));
    // phase continuity: consecutive values follow cos((n+1)^beta) within one derivative step
    double ref = std::cos(static_cast<double>(std::fmod(std::pow(static_cast<long double>(n + 1), 1.5L),
                                                        6.283185307179586476925286766559005768L)));
    CHECK(V.eval(n + 1) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("bernoulli sequence") {
    CHECK(bernoulli_sequence(2) == std::vector<int>{0, 1});
    CHECK(bernoulli_sequence(10) == std::vector<int>{0, 1, 0, 0, 0, 1, 1, 0, 1, 1});
    CHECK(bernoulli_sequence(19) == std::vector<int>{0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0});
    auto a = bernoulli_sequence(500), b = bernoulli_sequence(5000);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
    // every word of length 3 appears in lexicographic order right after the length-2 block
    std::int64_t start = 2 + 8;
    for (int w = 0; w < 8; ++w)
        for (int p = 0; p < 3; ++p) CHECK(bernoulli_term(start + 3 * w + p + 1) == ((w >> (2 - p)) & 1));
    CHECK_THROWS_AS(bernoulli_sequence(0), InvalidArgument);
    CHECK(bernoulli_potential(2.0).eval(2) == 2.0);
}

TEST_CASE("sparse composite layout") {
    auto s = sparse_composite(0.3, 42, {0}, {5});
    auto r = random_decay(0.3, 42);
    for (std::int64_t n = 1; n <= 5; ++n) CHECK(s.eval(n) == r.eval(n));
    CHECK(s.eval(6) == 0.0);
    auto t = sparse_composite(0.3, 42, {3}, {2});
    CHECK(t.eval(1) == 0.0);
    CHECK(t.eval(3) == 0.0);
    CHECK(t.eval(4) == doctest::Approx(std::pow(1.0, -0.3) * random_decay(0.0, 42).eval(4)).epsilon(1e-15));
    CHECK(t.eval(5) == doctest::Approx(std::pow(2.0, -0.3) * random_decay(0.0, 42).eval(5)).epsilon(1e-15));
    CHECK(t.eval(6) == 0.0);
    auto u = sparse_composite(0.3, 42, {2, 4}, {3, 2});
    CHECK(u.eval(2) == 0.0);
    CHECK(u.eval(3) != 0.0);
    CHECK(u.eval(6) == 0.0);
    CHECK(u.eval(9) == 0.0);
    CHECK(u.eval(10) == doctest::Approx(random_decay(0.0, 42).eval(10)).epsilon(1e-15));
    CHECK_THROWS_AS(sparse_composite(0.3, 1, {1, 2}, {3}), InvalidArgument);
    CHECK_THROWS_AS(sparse_composite(0.6, 1, {1}, {3}), InvalidArgument);
}

TEST_CASE("determinism and bounds of seeded families") {
    auto a = random_decay(0.0, 1234), b = random_decay(0.0, 1234), c = random_decay(0.0, 1235);
    double mean = 0.0;
    int diff = 0;
    for (std::int64_t n = 1; n <= 1000000; ++n) {
        double x = a.eval(n);
        REQUIRE(x == b.eval(n));
        REQUIRE(std::abs(x) <= 1.0);
        mean += x;
        diff += x != c.eval(n);
    }
    CHECK(std::abs(mean / 1e6) < 5e-3);
    CHECK(diff > 999000);
    auto am = almost_mathieu(2.0, 0.3819660112501051, 0.2);
    auto cp = cos_power(1.7, 2.3);
    for (std::int64_t n = 0; n <= 10000; ++n) {
        REQUIRE(std::abs(am.eval(n)) <= 2.0);
        REQUIRE(std::abs(cp.eval(n)) <= 1.7);
    }
    auto sp = sparse_composite(0.2, 5, {10, 20}, {30, 40});
    for (std::int64_t n = 0; n <= 200; ++n) REQUIRE(std::abs(sp.eval(n)) <= 1.0);
    CHECK(*sp.bound() == 1.0);
}

TEST_CASE("json round trip and fingerprints") {
    auto specs = {power_decay(0.2, 2.0), cos_power(3.0, 1.5), almost_mathieu(1.0, 0.618, 0.1, Domain::whole_line),
                  random_decay(0.8, 7), sparse_composite(0.3, 9, {1, 2}, {3, 4}), bernoulli_potential(),
                  periodic_potential({1.0, 0.0}), shifted(cos_power(1.0, 2.5), 12),
                  polynomial_cos(1.0, {0.25, 0.5})};
    for (const auto& s : specs) {
        auto back = PotentialSpec::from_json(s.to_json());
        CHECK(back.fingerprint() == s.fingerprint());
        for (std::int64_t n = 1; n <= 50; ++n) CHECK(back.eval(n) == s.eval(n));
    }
    CHECK(random_decay(0.8, 7).fingerprint() != random_decay(0.8, 8).fingerprint());
    CHECK_THROWS_AS(PotentialSpec::from_json({{"family", "nope"}}), InvalidArgument);
    CHECK_THROWS_AS(PotentialSpec::from_json({{"family", "zero"}, {"bogus", 1}}), InvalidArgument);
    CHECK_THROWS_AS(PotentialSpec::from_json({{"family", "power_decay"}, {"c", 1.0}, {"alpha", -1.0}}),
                    InvalidArgument);
}

TEST_CASE("file potentials are one-indexed") {
    const char* path = "potential_table_test.txt";
    {
        std::ofstream out(path);
        out << "0.5\n-1.25\n\n3\n";
    }
    auto f = from_file(path);
    CHECK(f.eval(1) == 0.5);
    CHECK(f.eval(2) == -1.25);
    CHECK(f.eval(3) == 3.0);
    CHECK_THROWS_AS(f.eval(4), DomainError);
    auto j = PotentialSpec::from_json({{"family", "from_file"}, {"path", path}});
    CHECK(j.eval(3) == 3.0);
    {
        std::ofstream out(path);
        out << "0.5 7\n";
    }
    CHECK_THROWS_AS(from_file(path), InvalidArgument);
    std::remove(path);
}

TEST_CASE("shift distance") {
    auto V = cos_power(1.0, 1.5);
    CHECK(shift_distance(V, shifted(V, 40), 40, 100) == 0.0);
    CHECK(shift_distance(zero_potential(), constant_potential(-0.7), 0, 10) == doctest::Approx(0.7));
}

TEST_CASE("read-off coefficients") {
    // N = 1: the polynomial read off at the anchor reproduces the single window value
    auto r = right_limit_search(1.5, 1.0, 4000, 1, 1e-6);
    CHECK(r.achieved_error <= 1e-9);
    CHECK(r.converged);
    // beta = 2.5: the leading fractional part drifts by a_2 ((n+1)^0.5 - n^0.5) / 2 pi -> 0
    double prev_step = 1.0;
    for (std::int64_t n : {100, 10000, 1000000, 100000000}) {
        auto b0 = readoff_coefficients(2.5, n, 2);
        auto b1 = readoff_coefficients(2.5, n + 1, 2);
        double step = std::abs(b1[2] - b0[2]);
        step = std::min(step, 1.0 - step);
        double expect = 2.5 * 1.5 / 2 * (std::sqrt(n + 1.0) - std::sqrt(double(n))) / (2 * std::numbers::pi);
        CHECK(step == doctest::Approx(expect).epsilon(1e-4));
        CHECK(step < prev_step);
        prev_step = step;
    }
    auto b = readoff_coefficients(1.5, 16, 1);
    CHECK(b[0] == doctest::Approx(64.0 / (2 * std::numbers::pi) - std::floor(64.0 / (2 * std::numbers::pi))));
    CHECK(b[1] == doctest::Approx(6.0 / (2 * std::numbers::pi)));
}

TEST_CASE("right limit search meets its own contract") {
    auto r = right_limit_search(1.5, 1.0, 200000, 20, 0.05);
    CHECK(r.poly_coeffs.size() == 2);
    for (double b : r.poly_coeffs) {
        CHECK(b >= 0.0);
        CHECK(b < 1.0);
    }
    auto W = r.limit_potential();
    auto V = cos_power(1.0, 1.5);
    CHECK(shift_distance(V, W, r.shifts.back(), 20) == doctest::Approx(r.achieved_error).epsilon(1e-6));
    for (std::size_t i = 0; i < r.shifts.size(); ++i)
        CHECK(shift_distance(V, W, r.shifts[i], 20) == doctest::Approx(r.shift_errors[i]).epsilon(1e-6));
    CHECK(r.converged == (r.achieved_error <= 0.05));
    CHECK_THROWS_AS(right_limit_search(2.0, 1.0, 100, 10, 0.1), InvalidArgument);
    CHECK_THROWS_AS(right_limit_search(1.5, 1.0, 5, 10, 0.1), InvalidArgument);
}
