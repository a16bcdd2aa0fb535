#pragma once

#include <cstdint>
#include <vector>

#include "tml/mat2.hpp"
#include "tml/potential.hpp"
#include "tml/scaled_product.hpp"

namespace tml {

// T_E(n, m): maps (u(m+1), u(m)) to (u(n+1), u(n)) for solutions of
// u(k+1) + u(k-1) + V(k) u(k) = E u(k). Inverse steps are used when n < m.
ScaledProduct transfer(const PotentialSpec& V, double E, std::int64_t n, std::int64_t m);

// Calls f(n, T_E(n, 0)) for n = 1..L in a single pass.
template <class F>
void walk_transfer(const PotentialSpec& V, double E, std::int64_t L, F&& f) {
    ScaledProduct T;
    for (std::int64_t n = 1; n <= L; ++n) {
        T.push(step_matrix(V.eval(n), E));
        f(n, static_cast<const ScaledProduct&>(T));
    }
}

// log ||T_E(n)||, n = 1..L (entry n-1 holds n).
std::vector<double> norm_trajectory(const PotentialSpec& V, double E, std::int64_t L);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// Boundary vector (u(1), u(0)) = (sin theta, cos theta); theta = pi/2 is Dirichlet (u(0) = 0).
Vec2 boundary_vector(double theta);
// Reduce an angle into [0, pi).
double normalize_angle(double theta);

// Solution u(0..N+1) with (u(1), u(0)) = (sin theta, cos theta). Entries are stored as
// mantissa * 2^exponent so exponentially growing or decaying solutions stay representable.
struct Solution {
    double E = 0.0;
    std::uint64_t potential_id = 0;
    std::vector<double> mantissa;
    std::vector<int> exponent;

    std::size_t size() const { return mantissa.size(); }
    double value(std::int64_t n) const;    // may overflow to inf
    double log_abs(std::int64_t n) const;  // -inf at zeros
};

Solution solution(const PotentialSpec& V, double E, double theta, std::int64_t N);
// Solution with arbitrary initial data (u(1), u(0)).
Solution solution_from(const PotentialSpec& V, double E, Vec2 initial, std::int64_t N);

// W(u, v)(n) = u(n+1) v(n) - u(n) v(n+1). Throws InvalidArgument if u, v belong to different (V, E).
double wronskian(const Solution& u, const Solution& v, std::int64_t n);
// <Phi, J Psi> with J = [[0, 1], [-1, 0]] on the pair vectors Phi = (u(n+1), u(n)); it equals W(u, v)(n).
double symplectic_form(Vec2 phi, Vec2 psi);

}  // namespace tml
