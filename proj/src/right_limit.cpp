#include <algorithm>
#include <cmath>
#include <numbers>

#include "tml/errors.hpp"
#include "tml/potential.hpp"

namespace tml {

void readoff_into(double beta, std::int64_t n, int k, double* out);

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

long double frac(long double x) { return x - std::floor(x); }

double circle_distance(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

// Unwrapped window phases, in turns: <n^beta / 2pi> + ((n+m)^beta - n^beta) / 2pi, m = 1..N.
std::vector<long double> window_turns(double beta, std::int64_t n, std::int64_t N) {
    long double b = beta;
    long double base = std::pow(static_cast<long double>(n), b);
    long double f0 = frac(base / kTwoPiL);
    std::vector<long double> out(static_cast<std::size_t>(N));
    for (std::int64_t m = 1; m <= N; ++m) {
        long double x = std::pow(static_cast<long double>(n + m), b);
        out[static_cast<std::size_t>(m - 1)] = f0 + (x - base) / kTwoPiL;
    }
    return out;
}

long double poly_turns(const std::vector<double>& b, std::int64_t m) {
    long double acc = 0.0L, pw = 1.0L;
    for (double c : b) {
        acc += frac(static_cast<long double>(c) * pw);
        pw *= static_cast<long double>(m);
    }
    return acc;
}

// Solve the small dense system a x = rhs in place (partial pivoting).
std::vector<long double> solve_small(std::vector<std::vector<long double>> a, std::vector<long double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (a[col][col] == 0.0L) throw InvalidArgument("right_limit_search: singular fit");
        for (std::size_t r = col + 1; r < n; ++r) {
            long double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Minimax polynomial fit of degree d to r(m), m = 1..N, by Lawson's reweighting.
std::vector<long double> minimax_fit(const std::vector<long double>& r, int d) {
    const std::size_t N = r.size();
    const std::size_t p = static_cast<std::size_t>(d) + 1;
    // scaled abscissa keeps the normal equations well conditioned
    std::vector<long double> x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = static_cast<long double>(i + 1) / static_cast<long double>(N);
    std::vector<long double> w(N, 1.0L / static_cast<long double>(N));
    std::vector<long double> best;
    long double best_err = INFINITY;
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<std::vector<long double>> a(p, std::vector<long double>(p, 0.0L));
        std::vector<long double> rhs(p, 0.0L);
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<long double> pw(p);
            pw[0] = 1.0L;
            for (std::size_t k = 1; k < p; ++k) pw[k] = pw[k - 1] * x[i];
            for (std::size_t j = 0; j < p; ++j) {
                rhs[j] += w[i] * pw[j] * r[i];
                for (std::size_t k = 0; k < p; ++k) a[j][k] += w[i] * pw[j] * pw[k];
            }
        }
        auto c = solve_small(a, rhs);
        long double err = 0.0L, wsum = 0.0L;
        std::vector<long double> res(N);
        for (std::size_t i = 0; i < N; ++i) {
            long double v = 0.0L, pw = 1.0L;
            for (std::size_t k = 0; k < p; ++k) {
                v += c[k] * pw;
                pw *= x[i];
            }
            res[i] = std::abs(r[i] - v);
            err = std::max(err, res[i]);
        }
        if (err < best_err) {
            best_err = err;
            best = c;
        }
        if (err == 0.0L) break;
        for (std::size_t i = 0; i < N; ++i) {
            w[i] *= res[i];
            wsum += w[i];
        }
        if (!(wsum > 0.0L)) break;
        for (auto& wi : w) wi /= wsum;
    }
    // back to the unscaled variable m = N x
    for (std::size_t k = 1; k < p; ++k) best[k] /= std::pow(static_cast<long double>(N), static_cast<long double>(k));
    return best;
}

// Degree-k phase polynomial for the window behind shift n: the read-off coefficients plus a
// minimax correction absorbing the part of the Taylor remainder visible in the window.
std::vector<double> fitted_coefficients(double beta, std::int64_t n, int k, std::int64_t N) {
    auto b = readoff_coefficients(beta, n, k);
    auto f = window_turns(beta, n, N);
    std::vector<long double> r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        long double d = f[i] - poly_turns(b, static_cast<std::int64_t>(i + 1));
        r[i] = d - std::nearbyint(d);
    }
    int d = static_cast<int>(std::min<std::int64_t>(k, N - 1));
    auto corr = minimax_fit(r, d);
    std::vector<double> out(b.size());
    for (std::size_t l = 0; l < b.size(); ++l) {
        long double v = b[l];
        if (l < corr.size()) v += corr[l];
        out[l] = static_cast<double>(frac(v));
    }
    return out;
}

double window_error(double beta, double lambda, std::int64_t n, std::int64_t N, const std::vector<double>& p) {
    auto f = window_turns(beta, n, N);
    double worst = 0.0;
    for (std::int64_t m = 1; m <= N; ++m) {
        double v = lambda * std::cos(static_cast<double>(kTwoPiL * frac(f[static_cast<std::size_t>(m - 1)])));
        double w = lambda * std::cos(static_cast<double>(kTwoPiL * frac(poly_turns(p, m))));
        worst = std::max(worst, std::abs(v - w));
    }
    return worst;
}

}  // namespace

void readoff_into(double beta, std::int64_t n, int k, double* out) {
    long double a = 1.0L;
    long double nl = static_cast<long double>(n);
    long double pw = std::pow(nl, static_cast<long double>(beta));
    for (int l = 0; l <= k; ++l) {
        if (l > 0) {
            a *= (static_cast<long double>(beta) - (l - 1)) / l;
            pw /= nl;
        }
        out[l] = static_cast<double>(frac(a * pw / kTwoPiL));
    }
}

std::vector<double> readoff_coefficients(double beta, std::int64_t n, int k) {
    if (n < 1) throw DomainError("readoff_coefficients: n >= 1 required");
    std::vector<double> out(static_cast<std::size_t>(k) + 1);
    readoff_into(beta, n, k, out.data());
    return out;
}

nlohmann::json RightLimitResult::to_json() const {
    nlohmann::json j;
    j["beta"] = beta;
    j["lambda"] = lambda;
    j["window"] = window;
    j["shifts"] = shifts;
    j["shift_errors"] = shift_errors;
    j["poly_coeffs"] = poly_coeffs;
    j["achieved_error"] = achieved_error;
    j["converged"] = converged;
    return j;
}

RightLimitResult right_limit_search(double beta, double lambda, std::int64_t n_max, std::int64_t window, double tol) {
    if (!(beta > 1.0) || beta == std::floor(beta)) throw InvalidArgument("right_limit_search: beta > 1 non-integer required");
    if (window < 1 || n_max < window) throw InvalidArgument("right_limit_search: n_max >= window >= 1 required");
    if (!(tol > 0.0)) throw InvalidArgument("right_limit_search: tol > 0 required");
    const int k = static_cast<int>(std::floor(beta));

    // The anchor is the largest admissible shift: the invisible Taylor remainder shrinks like
    // n^{beta-k-1}, so it carries the best window polynomial. The limit polynomial is read off there.
    const std::int64_t anchor = n_max;
    const auto target = readoff_coefficients(beta, anchor, k);

    RightLimitResult res;
    res.beta = beta;
    res.lambda = lambda;
    res.window = window;
    res.poly_coeffs = fitted_coefficients(beta, anchor, k, window);

    // Approximating sequence: in every dyadic range below the anchor, the shift whose read-off
    // coefficients sit closest (in circle distance) to the anchor's.
    for (std::int64_t lo = 1; lo < anchor; lo *= 2) {
        std::int64_t hi = std::min(2 * lo - 1, anchor - 1);
        std::int64_t best_n = lo;
        double best_d = 2.0;
        std::vector<double> b(static_cast<std::size_t>(k) + 1);
        for (std::int64_t n = lo; n <= hi; ++n) {
            readoff_into(beta, n, k, b.data());
            double d = 0.0;
            for (int l = 0; l <= k; ++l)
                d = std::max(d, circle_distance(b[static_cast<std::size_t>(l)], target[static_cast<std::size_t>(l)]));
            if (d < best_d) {
                best_d = d;
                best_n = n;
            }
        }
        res.shifts.push_back(best_n);
        res.shift_errors.push_back(window_error(beta, lambda, best_n, window, res.poly_coeffs));
    }
    res.shifts.push_back(anchor);
    res.shift_errors.push_back(window_error(beta, lambda, anchor, window, res.poly_coeffs));

    auto best = std::min_element(res.shift_errors.begin(), res.shift_errors.end()) - res.shift_errors.begin();
    std::rotate(res.shifts.begin() + best, res.shifts.begin() + best + 1, res.shifts.end());
    std::rotate(res.shift_errors.begin() + best, res.shift_errors.begin() + best + 1, res.shift_errors.end());
    res.achieved_error = res.shift_errors.back();
    res.converged = res.achieved_error <= tol;
    return res;
}

}  // namespace tml
