#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tml/mat2.hpp"
#include "tml/potential.hpp"
#include "tml/scaled_product.hpp"

namespace tml {

// Dirichlet truncation of V to sites [lo, hi]; verified iff E is at distance >= delta from its
// spectrum and from the spectrum of the doubled window, and the two distances differ by < delta/100.
struct GapCertificate {
    double E = 0.0, delta = 0.0;
    std::int64_t lo = 0, hi = 0;
    double min_eig_distance = 0.0;
    double min_eig_distance_doubled = 0.0;
    bool verified = false;

    nlohmann::json to_json() const;
};

// The window must contain {-(n+1), ..., n+1} so that the block acts like h on vectors supported in D_n.
GapCertificate gap_certificate(const PotentialSpec& V, double E, double delta, std::int64_t lo, std::int64_t hi,
                               std::int64_t n);

// T_E(n, m) on Z; V must be a whole-line spec when an index is negative.
ScaledProduct whole_line_transfer(const PotentialSpec& V, double E, std::int64_t n, std::int64_t m);

enum class AuditStatus { pass, inconclusive, fail, trivial };
std::string_view audit_status_name(AuditStatus s);

struct AuditRow {
    std::int64_t ell = 0;
    int phi = -1;  // angle index for the vector inequality
    double lhs_log = 0.0, rhs_log = 0.0;
    double margin = 0.0;  // (lhs - rhs) / rhs
    AuditStatus status = AuditStatus::pass;
};

// Rows for a_l >= d^2 (1+d^2)^{l-1} |u(0)|^2, the three-point version, the vector version over a phi
// grid, and ||T(-n, n)|| >= d^2 (1+d^2)^{n-1} / 2. Relative margins below 1e-6 are inconclusive.
struct GrowthAudit {
    double E = 0.0, delta = 0.0;
    std::int64_t n = 0;
    std::vector<AuditRow> single, triple, vector, window;
    bool pass = false;  // every margin >= -1e-8

    nlohmann::json to_json() const;
};

GrowthAudit growth_audit(const PotentialSpec& V, const GapCertificate& cert, std::int64_t n, Vec2 u0 = {1.0, 1.0},
                         int phi_grid = 16);

struct BarrierSite {
    std::int64_t n = 0;
    double abs_v = 0.0;
    double min_step_norm = 0.0;  // min over the energy grid of ||T_E(n, n-1)||
};

struct BarrierScan {
    std::vector<BarrierSite> records;  // sites where |V| exceeds every earlier value
    double threshold = 0.0;
    std::int64_t divergent_sites = 0;  // records with min_step_norm > threshold
    bool divergent = false;

    nlohmann::json to_json() const;
};

BarrierScan unbounded_barrier_scan(const PotentialSpec& V, const std::vector<double>& E_grid, std::int64_t n_max,
                                   double threshold = 10.0);

struct BlockEvidence {
    std::int64_t block = 0;  // 1-based
    std::int64_t start = 0, end = 0;
    std::vector<double> log_norms;  // log ||T_E(end, start - 1)|| per grid energy
    double threshold = 0.0;           // defaults to j
    double fraction_at_least_j = 0.0;  // fraction of the grid with norm >= threshold
};

struct SparseEvidence {
    std::vector<double> E_grid;
    std::vector<BlockEvidence> blocks;
    std::uint64_t fingerprint = 0;

    nlohmann::json to_json() const;
};

SparseEvidence sparse_block_evidence(double alpha, std::uint64_t seed, const std::vector<std::int64_t>& gaps,
                                     const std::vector<std::int64_t>& blocks, const std::vector<double>& E_grid,
                                     const std::vector<double>& thresholds = {}, int threads = 0);

}  // namespace tml
