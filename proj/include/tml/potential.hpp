#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tml {

enum class Family {
    zero,
    constant,
    power_decay,
    cos_power,
    almost_mathieu,
    random_decay,
    sparse_composite,
    bernoulli,
    periodic,
    shifted,
    from_file,
    polynomial_cos,
};

enum class Domain { half_line, whole_line };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);

// Declarative description of a potential V(n). Evaluation is a pure function of (spec, n).
//
//   zero               0
//   constant           c
//   power_decay        c |n|^-alpha                     (V(0) = 0)
//   cos_power          lambda cos(|n|^beta)
//   almost_mathieu     lambda cos(2 pi alpha n + theta0)
//   random_decay       lambda |n|^-alpha a_n            (a_n uniform on [-1,1] from seed; V(0) = 0)
//   sparse_composite   zero gaps m_j interleaved with blocks (n - offset_j)^-alpha a_n of length N_j
//   bernoulli          lambda b_n, b the concatenation of all binary words by length, then lexicographically
//   periodic           values[(n - 1) mod q]
//   shifted            base(n + shift)
//   from_file          values[n - 1], n = 1..size  (one real per line)
//   polynomial_cos     lambda cos(2 pi sum_l coeffs[l] n^l)
//
// Half-line specs accept n >= 0 (site 0 never enters the half-line operator); whole-line specs
// accept every integer for formula families. Table families (bernoulli, sparse_composite,
// from_file) are one-sided and reject n < 0.
struct PotentialSpec {
    Family family = Family::zero;
    Domain domain = Domain::half_line;
    double c = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 1.0;
    double theta0 = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;  // periodic cycle, file table, or polynomial coefficients
    std::vector<std::int64_t> gaps;
    std::vector<std::int64_t> blocks;
    std::int64_t shift = 0;
    std::shared_ptr<const PotentialSpec> base;
    std::string path;  // from_file source, informational

    double eval(std::int64_t n) const;
    // sup |V| when the family is bounded.
    std::optional<double> bound() const;
    // Validates parameters; throws InvalidArgument.
    void validate() const;

    nlohmann::json to_json() const;
    static PotentialSpec from_json(const nlohmann::json& j);
    // Stable 64-bit hash of the canonical JSON form.
    std::uint64_t fingerprint() const;
};

PotentialSpec zero_potential(Domain d = Domain::half_line);
PotentialSpec constant_potential(double c, Domain d = Domain::half_line);
PotentialSpec power_decay(double c0, double alpha);
PotentialSpec cos_power(double lambda, double beta, Domain d = Domain::half_line);
PotentialSpec almost_mathieu(double lambda, double alpha, double theta0, Domain d = Domain::half_line);
PotentialSpec random_decay(double alpha, std::uint64_t seed, double lambda = 1.0, Domain d = Domain::half_line);
PotentialSpec sparse_composite(double alpha, std::uint64_t seed, std::vector<std::int64_t> gaps,
                               std::vector<std::int64_t> blocks);
PotentialSpec bernoulli_potential(double lambda = 1.0);
PotentialSpec periodic_potential(std::vector<double> cycle, Domain d = Domain::half_line);
PotentialSpec shifted(const PotentialSpec& base, std::int64_t n0);
PotentialSpec table_potential(std::vector<double> values, std::string path = {});
PotentialSpec from_file(const std::string& path);
PotentialSpec polynomial_cos(double lambda, std::vector<double> coeffs, Domain d = Domain::half_line);

// Sequence element b_n (n >= 1) of the binary-word concatenation, and its first K terms.
int bernoulli_term(std::int64_t n);
std::vector<int> bernoulli_sequence(std::int64_t K);

// max_{1<=n<=N} |V(n + n0) - W(n)|
double shift_distance(const PotentialSpec& V, const PotentialSpec& W, std::int64_t n0, std::int64_t N);

// ---------------------------------------------------------------------------------------
// Right limits of lambda cos(n^beta)

// Fractional parts <a_l n^{beta - l} / 2 pi>, l = 0..k, with a_l = prod_{j<l}(beta - j) / l!.
std::vector<double> readoff_coefficients(double beta, std::int64_t n, int k);

struct RightLimitResult {
    std::vector<std::int64_t> shifts;         // approximating sequence, best match last
    std::vector<double> shift_errors;         // window error of each shift against the limit
    std::vector<double> poly_coeffs;          // b_0..b_k in units of 2 pi, each in [0,1)
    double achieved_error = 0.0;              // window error of shifts.back()
    bool converged = false;                   // achieved_error <= tol
    double beta = 0.0, lambda = 0.0;
    std::int64_t window = 0;

    PotentialSpec limit_potential() const { return polynomial_cos(lambda, poly_coeffs); }
    nlohmann::json to_json() const;
};

RightLimitResult right_limit_search(double beta, double lambda, std::int64_t n_max, std::int64_t window,
                                    double tol);

}  // namespace tml
