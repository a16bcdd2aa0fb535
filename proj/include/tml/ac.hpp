#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tml/potential.hpp"

namespace tml {

// L = 2, 4, ..., up to L_max (L_max appended when it is not a power of two).
std::vector<std::int64_t> dyadic_schedule(std::int64_t L_max);

struct CesaroTrace {
    double E = 0.0;
    std::vector<std::int64_t> L_values;
    std::vector<double> log_G;  // log of G_L = L^-1 sum_{n=1}^L ||T_E(n)||^2

    void write_csv(std::ostream& os) const;  // E,L,G_L
};

CesaroTrace cesaro_trace(const PotentialSpec& V, double E, std::int64_t L_max,
                         const std::vector<std::int64_t>& schedule = {});

// Minimum of G over the largest half of the schedule: an upper-bound proxy for the liminf.
double liminf_estimate(const CesaroTrace& t);
double log_liminf_estimate(const CesaroTrace& t);

// log ||T_E(m_j, k_j)||
std::vector<double> window_norms(const PotentialSpec& V, double E,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);

struct SubordinacyTrace {
    double E = 0.0, theta = 0.0;
    std::vector<std::int64_t> L_values;
    std::vector<double> log_ratio;  // log( sum_{n<=L} u_theta(n)^2 / sum_{n<=L} v_theta(n)^2 )
};

// u_theta from (u(1), u(0)) = (sin, cos); v_theta from (cos, -sin).
SubordinacyTrace subordinacy_trace(const PotentialSpec& V, double E, double theta, std::int64_t L_max,
                                   const std::vector<std::int64_t>& schedule = {});

struct BoundCheck {
    double log_lhs = 0.0, log_rhs = 0.0;
    double lhs = 0.0, rhs = 0.0;  // exp of the logs; may overflow
    bool holds = false;
};

// sum ||Psi_theta(n)||^2 / sum ||Phi_theta(n)||^2 over n = 1..L against G_L^2; holds iff lhs <= rhs (1 + 1e-8).
BoundCheck ratio_bound_check(const PotentialSpec& V, double E, double theta, std::int64_t L);

// Im m_D(E + i/L) against (5 + sqrt 24) L^-1 sum_{n=0}^{L+1} ||T_E(n)||^2; holds iff lhs <= rhs (1 + 1e-8).
BoundCheck m_imag_bound_check(const PotentialSpec& V, double E, std::int64_t L);

struct GrowthConstant {
    double C = 0.0;           // max_{2<=L<=L_max} G_L / (log L)^{1+delta}
    std::int64_t argmax = 0;
};
GrowthConstant log_growth_constant_scan(const PotentialSpec& V, double E, double delta, std::int64_t L_max);

// log ||T_E(L)|| / L
double lyapunov_estimate(const PotentialSpec& V, double E, std::int64_t L);

}  // namespace tml
