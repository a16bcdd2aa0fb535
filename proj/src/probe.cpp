#include "tml/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tml/errors.hpp"
#include "tml/parallel.hpp"
#include "tml/scaled_product.hpp"
#include "tml/spectral.hpp"
#include "tml/transfer.hpp"

namespace tml {

namespace {

double lse(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double shifted_window_trace(const PotentialSpec& V, double E, std::int64_t n_j, std::int64_t L) {
    if (n_j < 0) throw InvalidArgument("window start must be non-negative");
    if (L < 1) throw InvalidArgument("window length must be at least 1");
    ScaledProduct T;
    double acc = -std::numeric_limits<double>::infinity();
    for (std::int64_t m = n_j + 1; m <= n_j + L; ++m) {
        T.push(step_matrix(V.eval(m), E));
        acc = lse(acc, 2.0 * T.log_norm());
    }
    return acc - std::log(static_cast<double>(L));
}

double transfer_gap(const PotentialSpec& V, const PotentialSpec& W, std::int64_t n_j, double E, std::int64_t M) {
    if (n_j < 0 || M < 1) throw InvalidArgument("transfer_gap needs n_j >= 0 and M >= 1");
    Mat2 a = Mat2::identity(), b = Mat2::identity();
    double worst = 0.0;
    for (std::int64_t m = 1; m <= M; ++m) {
        a = step_matrix(V.eval(n_j + m), E) * a;
        b = step_matrix(W.eval(m), E) * b;
        worst = std::max(worst, opnorm(a - b));
    }
    return worst;
}

nlohmann::json ProbeReport::to_json() const {
    auto recs = nlohmann::json::array();
    for (const auto& r : records)
        recs.push_back({{"E", r.E},
                        {"log_G_base", r.log_G_base},
                        {"log_G_limit", r.log_G_limit},
                        {"carmona_base", r.carmona_base},
                        {"carmona_limit", r.carmona_limit},
                        {"base_divergent", r.base_divergent},
                        {"limit_divergent", r.limit_divergent}});
    return {{"base", base.to_json()},
            {"limit", limit.to_json()},
            {"shifts", shifts},
            {"shift_errors", shift_errors},
            {"transfer_gaps", transfer_gaps},
            {"L", L},
            {"divergence_threshold", kDivergentAverage},
            {"records", recs},
            {"base_divergent", base_divergent},
            {"limit_divergent", limit_divergent},
            {"base_bounded_limit_divergent", bounded_vs_divergent},
            {"disclaimer", disclaimer}};
}

ProbeReport right_limit_probe(const PotentialSpec& base, const PotentialSpec& limit,
                              const std::vector<std::int64_t>& shifts, const std::vector<double>& E_grid,
                              std::int64_t L, int threads) {
    if (shifts.empty()) throw InvalidArgument("probe needs at least one shift");
    if (E_grid.empty()) throw InvalidArgument("empty energy grid");
    if (L < 1) throw InvalidArgument("window length must be at least 1");
    ProbeReport rep;
    rep.base = base;
    rep.limit = limit;
    rep.shifts = shifts;
    rep.L = L;
    rep.disclaimer =
        "finite-window diagnostics only; the inclusion of a.c. supports under right limits is asymptotic and is "
        "not decided by these numbers";
    for (auto s : shifts) rep.shift_errors.push_back(shift_distance(base, limit, s, 50));

    rep.records.resize(E_grid.size());
    std::vector<std::vector<double>> gaps(E_grid.size(), std::vector<double>(shifts.size()));
    parallel_for(E_grid.size(), threads, [&](std::size_t i) {
        auto& r = rep.records[i];
        r.E = E_grid[i];
        for (auto s : shifts) r.log_G_base.push_back(shifted_window_trace(base, r.E, s, L));
        r.log_G_limit = shifted_window_trace(limit, r.E, 0, L);
        r.base_divergent = r.log_G_base.back() > std::log(kDivergentAverage);
        r.limit_divergent = r.log_G_limit > std::log(kDivergentAverage);
        for (std::size_t k = 0; k < shifts.size(); ++k) gaps[i][k] = transfer_gap(base, limit, shifts[k], r.E);
    });
    auto moved = shifted(base, shifts.back());
    auto cb = carmona_density(moved, E_grid, L, 0.5 * std::numbers::pi, threads);
    auto cl = carmona_density(limit, E_grid, L, 0.5 * std::numbers::pi, threads);
    rep.transfer_gaps.assign(shifts.size(), 0.0);
    for (std::size_t i = 0; i < E_grid.size(); ++i) {
        auto& r = rep.records[i];
        r.carmona_base = cb.values[i];
        r.carmona_limit = cl.values[i];
        rep.base_divergent += r.base_divergent;
        rep.limit_divergent += r.limit_divergent;
        rep.bounded_vs_divergent += !r.base_divergent && r.limit_divergent;
        for (std::size_t k = 0; k < shifts.size(); ++k) rep.transfer_gaps[k] = std::max(rep.transfer_gaps[k], gaps[i][k]);
    }
    return rep;
}

}  // namespace tml
