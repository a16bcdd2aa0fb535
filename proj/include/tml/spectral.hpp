#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tml/potential.hpp"

namespace tml {

// dirichlet:     sites 1..N, u(0) = 0, weights from site 1.
// neumann_paper: sites 2..N+1, u(1) = 0, weights from site 2.
// angle:         sites 1..N with V(1) + cot(theta), weights psi(1)^2 / sin^2(theta), the measure for
//                which solutions with (u(1), u(0)) = (sin theta, cos theta) satisfy Parseval.
enum class Boundary { dirichlet, neumann_paper, angle };

std::string_view boundary_name(Boundary b);
Boundary boundary_from_name(std::string_view name);

struct TruncatedOperator {
    Boundary bc = Boundary::dirichlet;
    double theta = 0.0;            // angle bc only
    std::int64_t first_site = 1;   // physical site of row 0
    std::vector<double> diag;      // unit off-diagonals
    double weight_scale = 1.0;     // multiplies psi(first_site)^2

    std::int64_t size() const { return static_cast<std::int64_t>(diag.size()); }
};

TruncatedOperator truncate(const PotentialSpec& V, std::int64_t N, Boundary bc, double theta = 0.0);

struct SpectralData {
    std::vector<double> E;  // ascending
    std::vector<double> w;  // weights

    double total_weight() const;
    void write_csv(std::ostream& os) const;
};

struct DensitySamples {
    std::vector<double> grid;
    std::vector<double> values;
    std::string meta;

    void write_csv(std::ostream& os) const;
};

// Largest N for which full eigenvectors are formed (N^2 doubles).
inline constexpr std::int64_t kMaxDenseN = 8000;
// Largest N accepted for eigenvalue/weight computations.
inline constexpr std::int64_t kMaxTridiagN = 400000;

// Eigenvalues and first-row weights of a symmetric tridiagonal matrix with unit off-diagonals,
// by implicit QL tracking only the first row of the eigenvector matrix.
SpectralData tridiag_first_row(const std::vector<double>& diag);

SpectralData eig(const TruncatedOperator& op);
SpectralData eig(const PotentialSpec& V, std::int64_t N, Boundary bc, double theta = 0.0);

struct ParsevalResult {
    double sum = 0.0;             // sum_k u(n; E_k)^2 w_k
    double max_ratio_error = 0.0; // max_k |u(n; E_k) - psi_k(n)/psi_k(b)| / max(|psi_k(n)/psi_k(b)|, 1)
    double max_component_error = 0.0;  // max_k |u(n; E_k)^2 w_k - psi_k(n)^2|
    std::int64_t degenerate = 0;  // eigenvectors with |psi_k(b)| < 1e-14, excluded from ratios
    std::int64_t refined = 0;     // eigenpairs recomputed in extended precision
    std::int64_t unresolved = 0;  // eigenpairs the refinement could not pin down (sum is then incomplete)
};

// Eigenpairs whose transfer growth would amplify double rounding beyond this factor are refined
// in MPFR arithmetic: the eigenvalue by Newton on u(N+1; E) = 0, the weight as 1 / sum u^2.
inline constexpr double kParsevalAmplification = 1e5;
inline constexpr long kParsevalMaxBits = 1 << 16;

// n is a physical site: 1..N for dirichlet, 2..N+1 for neumann_paper.
ParsevalResult parseval_check(const PotentialSpec& V, std::int64_t N, Boundary bc, std::int64_t n);
// Several sites sharing one eigendecomposition.
std::vector<ParsevalResult> parseval_check(const PotentialSpec& V, std::int64_t N, Boundary bc,
                                           const std::vector<std::int64_t>& sites);

// Truncation used for m-function evaluation at Im z = eps.
std::int64_t m_truncation(double eps);

// Herglotz m-functions: m_D = <delta_1, (h_D - z)^-1 delta_1>; m_N = z - V(1) + <delta_2, (h - z)^-1 delta_2>
// restricted to sites >= 2, so that m_D m_N = -1. Evaluated by continued fraction at depth N
// (0 selects m_truncation(Im z)).
std::complex<double> m_function(const PotentialSpec& V, std::complex<double> z, Boundary bc, std::int64_t N = 0);
// The same quantity as a sum over the eigenpairs of the truncated operator.
std::complex<double> m_eigensum(const PotentialSpec& V, std::complex<double> z, Boundary bc, std::int64_t N = 0);
std::complex<double> m_from_spectral(const SpectralData& s, std::complex<double> z);

DensitySamples rho_density(const PotentialSpec& V, const std::vector<double>& grid, double eps, Boundary bc,
                           int threads = 0);
DensitySamples min_density(const DensitySamples& f, const DensitySamples& g);
DensitySamples carmona_density(const PotentialSpec& V, const std::vector<double>& grid, std::int64_t L,
                               double theta, int threads = 0);

// log of the trapezoid integral of ||T_E(x)||^p over a uniform grid on [a, b], one entry per x.
std::vector<double> lq_norm_scan(const PotentialSpec& V, double a, double b, double p,
                                 const std::vector<std::int64_t>& x_list, std::int64_t grid_points = 2001,
                                 int threads = 0);

// Grid energies with |tr T_E(q, 0)| <= 2 (+1e-12 rounding allowance) for a period-q potential.
std::vector<double> discriminant_spectrum(const PotentialSpec& V, const std::vector<double>& grid);
std::int64_t period_of(const PotentialSpec& V);
double discriminant(const PotentialSpec& V, double E);
// Number of maximal runs of consecutive in-spectrum grid points.
std::int64_t band_count(const std::vector<double>& grid, const std::vector<double>& in_spectrum);

std::vector<double> uniform_grid(double a, double b, std::int64_t points);
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

// Smeared checks of int ||T(n,m)|| dmu <= 4 and int (L^-1 sum_{k=n+1}^{n+L} ||T(k,n)||^2)^{1/2} dmu <= 4,
// mu = min(rho_D, rho_N) at smearing eps, integrated over [a, b] (default: essential_hull(V)).
struct SoftCheckRow {
    std::int64_t n = 0, m = 0;  // m doubles as L for the averaged check
    double integral = 0.0;
    bool pass = false;
};
struct SoftCheckReport {
    std::vector<SoftCheckRow> norm_rows;
    std::vector<SoftCheckRow> average_rows;
    double eps = 0.0, slack = 0.0;
    double a = 0.0, b = 0.0;
    bool pass = false;
};
SoftCheckReport soft_measure_checks(const PotentialSpec& V, double eps, double slack,
                                    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                    int threads = 0, std::optional<std::pair<double, double>> window = {});

// [-2, 2] for potentials tending to zero (outside it the spectrum is at most discrete and
// min(rho_D, rho_N) has no mass); [-2-B, 2+B] otherwise.
std::pair<double, double> essential_hull(const PotentialSpec& V);

}  // namespace tml
