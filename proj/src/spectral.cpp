#include "tml/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "tml/errors.hpp"
#include "tml/parallel.hpp"
#include "tml/scaled_product.hpp"
#include "tml/transfer.hpp"
#include "precise_eigen.hpp"

namespace tml {

namespace {

using cplx = std::complex<double>;

std::vector<double> sample(const PotentialSpec& V, std::int64_t first, std::int64_t count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = V.eval(first + i);
    return out;
}

// g_first = <delta_first, (H - z)^-1 delta_first> for H on sites first..first+v.size()-1.
cplx continued_fraction(const std::vector<double>& v, cplx z) {
    cplx g = 0.0;
    for (std::size_t i = v.size(); i-- > 0;) g = 1.0 / (v[i] - z - g);
    return g;
}

double log_sum_exp(const std::vector<double>& x) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : x) s += std::exp(v - mx);
    return mx + std::log(s);
}

double spectral_bound(const PotentialSpec& V) {
    auto b = V.bound();
    if (!b) throw InvalidArgument("potential has no finite bound; spectral hull unknown");
    return *b;
}

}  // namespace

std::string_view boundary_name(Boundary b) {
    switch (b) {
        case Boundary::dirichlet: return "dirichlet";
        case Boundary::neumann_paper: return "neumann_paper";
        case Boundary::angle: return "angle";
    }
    return "?";
}

Boundary boundary_from_name(std::string_view name) {
    if (name == "dirichlet") return Boundary::dirichlet;
    if (name == "neumann_paper" || name == "neumann") return Boundary::neumann_paper;
    if (name == "angle") return Boundary::angle;
    throw InvalidArgument("unknown boundary condition: " + std::string(name));
}

TruncatedOperator truncate(const PotentialSpec& V, std::int64_t N, Boundary bc, double theta) {
    if (N < 2) throw InvalidArgument("truncation size must be at least 2");
    if (N > kMaxTridiagN) throw Refusal("truncation size exceeds the eigen-solver budget");
    TruncatedOperator op;
    op.bc = bc;
    switch (bc) {
        case Boundary::dirichlet:
            op.first_site = 1;
            break;
        case Boundary::neumann_paper:
            op.first_site = 2;
            break;
        case Boundary::angle: {
            op.theta = normalize_angle(theta);
            double s = std::sin(op.theta);
            if (s < 1e-8) throw InvalidArgument("angle boundary needs sin(theta) > 0; use neumann_paper");
            op.first_site = 1;
            op.weight_scale = 1.0 / (s * s);
            break;
        }
    }
    op.diag = sample(V, op.first_site, N);
    if (bc == Boundary::angle) op.diag[0] += std::cos(op.theta) / std::sin(op.theta);
    for (double d : op.diag)
        if (!std::isfinite(d)) throw DomainError("non-finite potential value in truncation");
    return op;
}

double SpectralData::total_weight() const { return std::accumulate(w.begin(), w.end(), 0.0); }

void SpectralData::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "E_k,w_k\n";
    for (std::size_t k = 0; k < E.size(); ++k) os << E[k] << ',' << w[k] << '\n';
}

void DensitySamples::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "E,value\n";
    for (std::size_t k = 0; k < grid.size(); ++k) os << grid[k] << ',' << values[k] << '\n';
}

SpectralData tridiag_first_row(const std::vector<double>& diag) {
    const std::size_t n = diag.size();
    std::vector<double> d = diag, e(n, 1.0), z(n, 0.0);
    if (n == 0) return {};
    e[n - 1] = 0.0;
    z[0] = 1.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw std::runtime_error("tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool deflated = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    double zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if (deflated) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    SpectralData out;
    out.E.resize(n);
    out.w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.E[k] = d[idx[k]];
        out.w[k] = z[idx[k]] * z[idx[k]];
    }
    return out;
}

SpectralData eig(const TruncatedOperator& op) {
    SpectralData s = tridiag_first_row(op.diag);
    if (op.weight_scale != 1.0)
        for (double& w : s.w) w *= op.weight_scale;
    return s;
}

SpectralData eig(const PotentialSpec& V, std::int64_t N, Boundary bc, double theta) {
    return eig(truncate(V, N, bc, theta));
}

std::vector<ParsevalResult> parseval_check(const PotentialSpec& V, std::int64_t N, Boundary bc,
                                           const std::vector<std::int64_t>& sites) {
    if (bc == Boundary::angle) throw InvalidArgument("parseval_check supports dirichlet and neumann_paper");
    if (N > kMaxDenseN) throw Refusal("N exceeds the dense eigenvector budget");
    auto op = truncate(V, N, bc);
    std::int64_t b = op.first_site;
    std::vector<std::int64_t> ts;
    for (auto n : sites) {
        if (n < b || n > b + N - 1) throw InvalidArgument("site outside the truncated operator");
        ts.push_back(n - b);
    }
    std::int64_t t_max = ts.empty() ? 0 : *std::max_element(ts.begin(), ts.end());

    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(op.diag.data(), N);
    Eigen::VectorXd sub = Eigen::VectorXd::Ones(N - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolver failed");
    const auto& vecs = es.eigenvectors();

    // The boundary data (u(b), u(b-1)) = (+-1, 0) of both conditions reduce to y(-1) = 0, y(0) = 1
    // on the local sites; signs drop out of squares and of u(n)/u(b).
    std::vector<ParsevalResult> res(sites.size());
    std::vector<double> refined_E;
    std::int64_t refined = 0, unresolved = 0, degenerate = 0;
    std::vector<double> u(ts.size()), term(ts.size());
    for (Eigen::Index k = 0; k < N; ++k) {
        double E = es.eigenvalues()(k);
        double psi_b = vecs(0, k);

        // Rounding in the recursion is amplified by up to max_i ||T(i)||^2.
        ScaledProduct T;
        double growth = 0.0;
        for (std::int64_t i = 0; i < N; ++i) {
            T.push(step_matrix(op.diag[static_cast<std::size_t>(i)], E));
            growth = std::max(growth, T.log_norm());
        }
        if (2.0 * growth < std::log(kParsevalAmplification)) {
            double ym = 0.0, y = 1.0, w = psi_b * psi_b;
            for (std::int64_t i = 0; i <= t_max; ++i) {
                for (std::size_t j = 0; j < ts.size(); ++j)
                    if (ts[j] == i) {
                        u[j] = y;
                        term[j] = y * y * w;
                    }
                double yn = (E - op.diag[static_cast<std::size_t>(i)]) * y - ym;
                ym = y;
                y = yn;
            }
        } else {
            long bits = static_cast<long>(std::ceil(2.0 * growth / std::log(2.0))) + 96;
            if (bits > kParsevalMaxBits) {
                ++unresolved;
                continue;
            }
            auto r = detail::refine_eigenpair(op.diag, E, ts, bits);
            if (!r.converged || std::abs(r.E - E) > 1e-9 * std::max(1.0, std::abs(E))) {
                ++unresolved;
                continue;
            }
            ++refined;
            refined_E.push_back(r.E);
            u = r.ratio;
            term = r.term;
        }
        bool degen = std::abs(psi_b) < 1e-14;
        degenerate += degen;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            double psi_n = vecs(ts[j], k);
            auto& r = res[j];
            r.sum += term[j];
            r.max_component_error = std::max(r.max_component_error, std::abs(term[j] - psi_n * psi_n));
            if (degen) continue;
            double ratio = psi_n / psi_b;
            r.max_ratio_error = std::max(r.max_ratio_error, std::abs(u[j] - ratio) / std::max(std::abs(ratio), 1.0));
        }
    }
    // two eigenvalues refined onto the same root would double count
    std::sort(refined_E.begin(), refined_E.end());
    for (std::size_t i = 1; i < refined_E.size(); ++i)
        if (refined_E[i] == refined_E[i - 1]) ++unresolved;
    for (auto& r : res) {
        r.refined = refined;
        r.unresolved = unresolved;
        r.degenerate = degenerate;
    }
    return res;
}

ParsevalResult parseval_check(const PotentialSpec& V, std::int64_t N, Boundary bc, std::int64_t n) {
    return parseval_check(V, N, bc, std::vector<std::int64_t>{n})[0];
}

std::int64_t m_truncation(double eps) {
    if (!(eps > 0.0)) throw DomainError("m-function needs Im z > 0");
    return static_cast<std::int64_t>(std::ceil(50.0 / eps));
}

std::complex<double> m_function(const PotentialSpec& V, std::complex<double> z, Boundary bc, std::int64_t N) {
    if (!(z.imag() > 0.0)) throw DomainError("m-function needs Im z > 0");
    if (N <= 0) N = m_truncation(z.imag());
    switch (bc) {
        case Boundary::dirichlet: return continued_fraction(sample(V, 1, N), z);
        case Boundary::neumann_paper: return z - V.eval(1) + continued_fraction(sample(V, 2, N), z);
        case Boundary::angle: break;
    }
    throw InvalidArgument("m_function supports dirichlet and neumann_paper");
}

std::complex<double> m_from_spectral(const SpectralData& s, std::complex<double> z) {
    cplx sum = 0.0;
    for (std::size_t k = 0; k < s.E.size(); ++k) sum += s.w[k] / (s.E[k] - z);
    return sum;
}

std::complex<double> m_eigensum(const PotentialSpec& V, std::complex<double> z, Boundary bc, std::int64_t N) {
    if (!(z.imag() > 0.0)) throw DomainError("m-function needs Im z > 0");
    if (bc == Boundary::angle) throw InvalidArgument("m_eigensum supports dirichlet and neumann_paper");
    if (N <= 0) N = m_truncation(z.imag());
    cplx g = m_from_spectral(eig(V, N, bc), z);
    return bc == Boundary::dirichlet ? g : z - V.eval(1) + g;
}

DensitySamples rho_density(const PotentialSpec& V, const std::vector<double>& grid, double eps, Boundary bc,
                           int threads) {
    std::int64_t N = m_truncation(eps);
    if (bc == Boundary::angle) throw InvalidArgument("rho_density supports dirichlet and neumann_paper");
    std::int64_t first = bc == Boundary::dirichlet ? 1 : 2;
    std::vector<double> v = sample(V, first, N);
    double v1 = V.eval(1);
    DensitySamples out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        cplx z(grid[i], eps);
        cplx m = continued_fraction(v, z);
        if (bc == Boundary::neumann_paper) m = z - v1 + m;
        out.values[i] = m.imag() / std::numbers::pi;
    });
    out.meta = "stieltjes eps=" + std::to_string(eps) + " bc=" + std::string(boundary_name(bc)) +
               " N=" + std::to_string(N);
    return out;
}

DensitySamples min_density(const DensitySamples& f, const DensitySamples& g) {
    if (f.grid != g.grid) throw InvalidArgument("density grids differ");
    DensitySamples out;
    out.grid = f.grid;
    out.values.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = std::min(f.values[i], g.values[i]);
    out.meta = "min(" + f.meta + "; " + g.meta + ")";
    return out;
}

DensitySamples carmona_density(const PotentialSpec& V, const std::vector<double>& grid, std::int64_t L,
                               double theta, int threads) {
    if (L < 1) throw InvalidArgument("Carmona length must be at least 1");
    std::vector<double> v = sample(V, 1, L);
    Vec2 u = boundary_vector(theta);
    DensitySamples out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        ScaledProduct T;
        for (double x : v) T.push(step_matrix(x, grid[i]));
        out.values[i] = std::exp(-2.0 * T.log_norm_applied(u)) / std::numbers::pi;
    });
    out.meta = "carmona L=" + std::to_string(L) + " theta=" + std::to_string(normalize_angle(theta));
    return out;
}

std::vector<double> uniform_grid(double a, double b, std::int64_t points) {
    if (points < 2 || !(b > a)) throw InvalidArgument("grid needs at least two points and a < b");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (std::int64_t i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    g.back() = b;
    return g;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

std::vector<double> lq_norm_scan(const PotentialSpec& V, double a, double b, double p,
                                 const std::vector<std::int64_t>& x_list, std::int64_t grid_points, int threads) {
    if (!(p > 2.0)) throw InvalidArgument("lq_norm_scan needs p > 2");
    if (!(a < b)) throw InvalidArgument("lq_norm_scan needs a < b");
    if (x_list.empty()) return {};
    std::vector<std::int64_t> xs = x_list;
    std::sort(xs.begin(), xs.end());
    if (xs.front() < 1) throw InvalidArgument("x must be at least 1");
    auto grid = uniform_grid(a, b, grid_points);
    std::vector<double> v = sample(V, 1, xs.back());
    // logs[j][i] = p log ||T_{E_i}(xs[j])|| + log(trapezoid weight_i)
    std::vector<std::vector<double>> logs(xs.size(), std::vector<double>(grid.size()));
    double h = (b - a) / static_cast<double>(grid_points - 1);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        double lw = std::log(i == 0 || i + 1 == grid.size() ? h / 2 : h);
        ScaledProduct T;
        std::size_t j = 0;
        for (std::int64_t n = 1; n <= xs.back(); ++n) {
            T.push(step_matrix(v[static_cast<std::size_t>(n - 1)], grid[i]));
            while (j < xs.size() && xs[j] == n) logs[j++][i] = p * T.log_norm() + lw;
        }
    });
    std::vector<double> by_sorted(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) by_sorted[j] = log_sum_exp(logs[j]);
    std::vector<double> out;
    out.reserve(x_list.size());
    for (auto x : x_list) {
        auto it = std::lower_bound(xs.begin(), xs.end(), x);
        out.push_back(by_sorted[static_cast<std::size_t>(it - xs.begin())]);
    }
    return out;
}

std::int64_t period_of(const PotentialSpec& V) {
    switch (V.family) {
        case Family::zero:
        case Family::constant: return 1;
        case Family::periodic: return static_cast<std::int64_t>(V.values.size());
        default: throw InvalidArgument("discriminant needs a periodic potential");
    }
}

double discriminant(const PotentialSpec& V, double E) {
    std::int64_t q = period_of(V);
    ScaledProduct T;
    for (std::int64_t n = 1; n <= q; ++n) T.push(step_matrix(V.eval(n), E));
    double tr = T.mat().trace();
    if (tr == 0.0) return 0.0;
    return std::copysign(std::exp(T.log_scale() + std::log(std::abs(tr))), tr);
}

std::vector<double> discriminant_spectrum(const PotentialSpec& V, const std::vector<double>& grid) {
    period_of(V);
    std::vector<double> out;
    for (double E : grid)
        if (std::abs(discriminant(V, E)) <= 2.0 + 1e-12) out.push_back(E);
    return out;
}

std::int64_t band_count(const std::vector<double>& grid, const std::vector<double>& in_spectrum) {
    std::int64_t bands = 0;
    std::size_t j = 0;
    bool inside = false;
    for (double E : grid) {
        bool member = j < in_spectrum.size() && in_spectrum[j] == E;
        if (member) ++j;
        if (member && !inside) ++bands;
        inside = member;
    }
    return bands;
}

std::pair<double, double> essential_hull(const PotentialSpec& V) {
    switch (V.family) {
        case Family::zero: return {-2.0, 2.0};
        case Family::power_decay:
        case Family::random_decay:
        case Family::sparse_composite:
            if (V.alpha > 0.0) return {-2.0, 2.0};
            break;
        default: break;
    }
    double B = spectral_bound(V);
    return {-2.0 - B, 2.0 + B};
}

SoftCheckReport soft_measure_checks(const PotentialSpec& V, double eps, double slack,
                                    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                    int threads, std::optional<std::pair<double, double>> window) {
    if (!(eps > 0.0)) throw DomainError("smearing must be positive");
    auto [a, b] = window ? *window : essential_hull(V);
    auto points = static_cast<std::int64_t>(std::ceil((b - a) / (eps / 5.0))) + 1;
    auto grid = uniform_grid(a, b, points);
    auto mu = min_density(rho_density(V, grid, eps, Boundary::dirichlet, threads),
                          rho_density(V, grid, eps, Boundary::neumann_paper, threads));

    std::int64_t reach = 1;
    for (auto [n, m] : pairs) {
        if (n < 0 || m < 0) throw InvalidArgument("soft check sites must be non-negative");
        reach = std::max({reach, n, m, n + m});
    }
    std::vector<double> v = sample(V, 0, reach + 1);

    SoftCheckReport rep;
    rep.eps = eps;
    rep.slack = slack;
    rep.a = a;
    rep.b = b;
    rep.pass = true;
    auto integrate = [&](auto&& integrand) {
        std::vector<double> y(grid.size());
        parallel_for(grid.size(), threads, [&](std::size_t i) { y[i] = integrand(grid[i]) * mu.values[i]; });
        return trapezoid(grid, y);
    };
    auto step = [&](std::int64_t k, double E) { return step_matrix(v[static_cast<std::size_t>(k)], E); };

    for (auto [n, m] : pairs) {
        SoftCheckRow row{n, m, 0.0, false};
        row.integral = integrate([&](double E) {
            std::int64_t lo = std::min(n, m), hi = std::max(n, m);
            ScaledProduct T;
            for (std::int64_t k = lo + 1; k <= hi; ++k) T.push(step(k, E));
            return std::exp(T.log_norm());
        });
        row.pass = row.integral <= 4.0 + slack;
        rep.pass = rep.pass && row.pass;
        rep.norm_rows.push_back(row);

        std::int64_t L = std::max<std::int64_t>(m, 1);
        SoftCheckRow avg{n, L, 0.0, false};
        avg.integral = integrate([&](double E) {
            ScaledProduct T;
            double s = 0.0;
            for (std::int64_t k = n + 1; k <= n + L; ++k) {
                T.push(step(k, E));
                s += std::exp(2.0 * T.log_norm());
            }
            return std::sqrt(s / static_cast<double>(L));
        });
        avg.pass = avg.integral <= 4.0 + slack;
        rep.pass = rep.pass && avg.pass;
        rep.average_rows.push_back(avg);
    }
    return rep;
}

}  // namespace tml
