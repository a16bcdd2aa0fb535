#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tml/ac.hpp"
#include "tml/errors.hpp"
#include "tml/probe.hpp"
#include "tml/spectral.hpp"

using namespace tml;

TEST_CASE("windowed averages") {
    auto V = random_decay(0.6, 12, 1.3);
    for (double E : {-1.1, 0.2, 2.0}) {
        auto c = cesaro_trace(V, E, 500, {500});
        CHECK(std::abs(shifted_window_trace(V, E, 0, 500) - c.log_G[0]) < 1e-12);
    }
    for (std::int64_t nj : {0, 3, 1000})
        for (std::int64_t L : {1, 7, 300}) CHECK(std::abs(shifted_window_trace(zero_potential(), 0.0, nj, L)) < 1e-12);

    // direct long-double sum of squared norms
    for (std::int64_t nj : {5, 40}) {
        long double acc = 0;
        for (std::int64_t m = nj + 1; m <= nj + 60; ++m) {
            double n = oracle::svd_norm(oracle::to_mat(oracle::naive_transfer(V, 0.7, m, nj)));
            acc += (long double)n * n;
        }
        CHECK(std::abs(shifted_window_trace(V, 0.7, nj, 60) - std::log(static_cast<double>(acc / 60))) < 1e-10);
    }
    CHECK_THROWS_AS(shifted_window_trace(V, 0.0, -1, 5), InvalidArgument);
    CHECK_THROWS_AS(shifted_window_trace(V, 0.0, 0, 0), InvalidArgument);
}

TEST_CASE("transfer gap against an exact shift is zero") {
    auto V = cos_power(1.0, 1.5);
    auto W = shifted(V, 777);
    CHECK(transfer_gap(V, W, 777, 0.5) == 0.0);
    CHECK(transfer_gap(V, W, 776, 0.5) > 0.0);
}

TEST_CASE("right-limit transfer convergence for cos(n^1.5)") {
    auto rl = right_limit_search(1.5, 1.0, 1000000, 50, 0.1);
    REQUIRE(rl.shifts.size() >= 4);
    auto V = cos_power(1.0, 1.5);
    auto W = rl.limit_potential();
    double first = transfer_gap(V, W, rl.shifts.front(), 0.5);
    double last = transfer_gap(V, W, rl.shifts.back(), 0.5);
    CHECK(last < first);
    CHECK(last < 1.0);
    // window averages get close once the shift matches
    double diff = std::abs(shifted_window_trace(V, 0.5, rl.shifts.back(), 50) - shifted_window_trace(W, 0.5, 0, 50));
    CHECK(diff < 0.5);
}

TEST_CASE("probe against an exact shift") {
    auto B = bernoulli_potential(1.0);
    auto grid = uniform_grid(-3.0, 3.0, 31);
    auto rep = right_limit_probe(B, shifted(B, 1000), {1000}, grid, 512);
    REQUIRE(rep.records.size() == 31);
    for (const auto& r : rep.records) {
        CHECK(std::abs(r.log_G_base[0] - r.log_G_limit) < 1e-10);
        CHECK(std::abs(r.carmona_base - r.carmona_limit) < 1e-10 * std::max(1.0, r.carmona_limit));
        CHECK(r.base_divergent == r.limit_divergent);
    }
    CHECK(rep.bounded_vs_divergent == 0);
    CHECK(rep.shift_errors[0] == 0.0);
    CHECK(rep.transfer_gaps[0] == 0.0);
    auto j = rep.to_json();
    CHECK(j["records"].size() == 31);
    CHECK(j.contains("disclaimer"));

    CHECK_THROWS_AS(right_limit_probe(B, B, {}, grid), InvalidArgument);
    CHECK_THROWS_AS(right_limit_probe(B, B, {1}, {}), InvalidArgument);
}

TEST_CASE("strong coupling: both sides diverge") {
    auto rl = right_limit_search(1.5, 3.0, 1000000, 50, 0.1);
    auto grid = uniform_grid(-5.0, 5.0, 41);
    std::vector<std::int64_t> tail(rl.shifts.end() - std::min<std::ptrdiff_t>(3, rl.shifts.size()), rl.shifts.end());
    auto rep = right_limit_probe(cos_power(3.0, 1.5), rl.limit_potential(), tail, grid);
    CHECK(rep.base_divergent == 41);
    CHECK(rep.limit_divergent == 41);

    auto B = bernoulli_potential(1.0);
    auto bern = right_limit_probe(B, shifted(B, 5000), {5000}, uniform_grid(-3.0, 3.0, 41));
    CHECK(bern.base_divergent > 20);
}
