#include "tml/transfer.hpp"

#include <cmath>
#include <numbers>

#include "tml/errors.hpp"

namespace tml {

ScaledProduct transfer(const PotentialSpec& V, double E, std::int64_t n, std::int64_t m) {
    if (!std::isfinite(E)) throw DomainError("transfer: non-finite energy");
    if (V.domain == Domain::half_line && (n < 0 || m < 0))
        throw DomainError("transfer: half-line indices must be >= 0");
    ScaledProduct T;
    if (n >= m) {
        for (std::int64_t k = m + 1; k <= n; ++k) T.push(step_matrix(V.eval(k), E));
    } else {
        for (std::int64_t k = m; k > n; --k) T.push(inverse_step_matrix(V.eval(k), E));
    }
    return T;
}

std::vector<double> norm_trajectory(const PotentialSpec& V, double E, std::int64_t L) {
    if (L < 1) throw InvalidArgument("norm_trajectory: L >= 1 required");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(L));
    walk_transfer(V, E, L, [&](std::int64_t, const ScaledProduct& T) { out.push_back(T.log_norm()); });
    return out;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("ls_slope: need two or more paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

Vec2 boundary_vector(double theta) { return {std::sin(theta), std::cos(theta)}; }

double normalize_angle(double theta) {
    double t = std::fmod(theta, std::numbers::pi);
    if (t < 0.0) t += std::numbers::pi;
    if (t >= std::numbers::pi) t = 0.0;
    return t;
}

double Solution::value(std::int64_t n) const {
    auto i = static_cast<std::size_t>(n);
    return std::ldexp(mantissa.at(i), exponent.at(i));
}

double Solution::log_abs(std::int64_t n) const {
    auto i = static_cast<std::size_t>(n);
    return std::log(std::abs(mantissa.at(i))) + exponent.at(i) * std::numbers::ln2;
}

Solution solution_from(const PotentialSpec& V, double E, Vec2 initial, std::int64_t N) {
    if (N < 1) throw InvalidArgument("solution: N >= 1 required");
    if (!std::isfinite(E)) throw DomainError("solution: non-finite energy");
    constexpr int kBig = 256;
    const double hi = std::ldexp(1.0, kBig);
    const double lo = std::ldexp(1.0, -kBig);
    Solution s;
    s.E = E;
    s.potential_id = V.fingerprint();
    s.mantissa.resize(static_cast<std::size_t>(N) + 2);
    s.exponent.resize(static_cast<std::size_t>(N) + 2);
    double prev = initial.y;  // u(n-1)
    double cur = initial.x;   // u(n)
    int e = 0;
    s.mantissa[0] = prev;
    s.mantissa[1] = cur;
    for (std::int64_t n = 1; n <= N; ++n) {
        double next = (E - V.eval(n)) * cur - prev;
        prev = cur;
        cur = next;
        s.mantissa[static_cast<std::size_t>(n + 1)] = cur;
        s.exponent[static_cast<std::size_t>(n + 1)] = e;
        double big = std::fmax(std::abs(cur), std::abs(prev));
        if (big > hi) {
            cur = std::ldexp(cur, -kBig);
            prev = std::ldexp(prev, -kBig);
            e += kBig;
        } else if (big < lo && big > 0.0) {
            cur = std::ldexp(cur, kBig);
            prev = std::ldexp(prev, kBig);
            e -= kBig;
        }
    }
    return s;
}

Solution solution(const PotentialSpec& V, double E, double theta, std::int64_t N) {
    return solution_from(V, E, boundary_vector(theta), N);
}

double wronskian(const Solution& u, const Solution& v, std::int64_t n) {
    if (u.E != v.E || u.potential_id != v.potential_id)
        throw InvalidArgument("wronskian: solutions belong to different (V, E)");
    if (n < 0 || static_cast<std::size_t>(n + 1) >= std::min(u.size(), v.size()))
        throw DomainError("wronskian: index out of range");
    auto i = static_cast<std::size_t>(n);
    double a = std::ldexp(u.mantissa[i + 1] * v.mantissa[i], u.exponent[i + 1] + v.exponent[i]);
    double b = std::ldexp(u.mantissa[i] * v.mantissa[i + 1], u.exponent[i] + v.exponent[i + 1]);
    return a - b;
}

double symplectic_form(Vec2 phi, Vec2 psi) { return phi.x * psi.y - phi.y * psi.x; }

}  // namespace tml
