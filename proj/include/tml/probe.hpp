#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "tml/potential.hpp"

namespace tml {

// log of L^-1 sum_{m=n_j+1}^{n_j+L} ||T_V(m, n_j)||^2
double shifted_window_trace(const PotentialSpec& V, double E, std::int64_t n_j, std::int64_t L);

// max_{1<=m<=M} ||T_V(n_j + m, n_j) - T_W(m, 0)|| (entrywise products, operator norm of the difference)
double transfer_gap(const PotentialSpec& V, const PotentialSpec& W, std::int64_t n_j, double E, std::int64_t M = 50);

constexpr double kDivergentAverage = 1e4;

struct ProbeRecord {
    double E = 0.0;
    std::vector<double> log_G_base;  // one per shift
    double log_G_limit = 0.0;
    double carmona_base = 0.0;   // Carmona density of the base shifted by the last shift
    double carmona_limit = 0.0;
    bool base_divergent = false;   // window average at the last shift above kDivergentAverage
    bool limit_divergent = false;
};

struct ProbeReport {
    PotentialSpec base, limit;
    std::vector<std::int64_t> shifts;
    std::vector<double> shift_errors;   // shift_distance(base, limit, n_j, 50)
    std::vector<double> transfer_gaps;  // max over the grid of transfer_gap at each shift
    std::int64_t L = 0;
    std::vector<ProbeRecord> records;
    std::int64_t base_divergent = 0, limit_divergent = 0;
    std::int64_t bounded_vs_divergent = 0;  // base bounded while the limit diverges
    std::string disclaimer;

    nlohmann::json to_json() const;
};

ProbeReport right_limit_probe(const PotentialSpec& base, const PotentialSpec& limit,
                              const std::vector<std::int64_t>& shifts, const std::vector<double>& E_grid,
                              std::int64_t L = 1 << 12, int threads = 0);

}  // namespace tml
