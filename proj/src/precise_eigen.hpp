#pragma once

#include <cstdint>
#include <vector>

namespace tml::detail {

// Eigenpair of the tridiagonal matrix with the given diagonal and unit off-diagonals, refined
// in MPFR arithmetic. The eigenvector is the solution y(-1) = 0, y(0) = 1 of
// y(i+1) = (E - diag[i]) y(i) - y(i-1); E is a zero of y(N).
struct RefinedPair {
    double E = 0.0;
    double weight = 0.0;  // y(0)^2 / sum_i y(i)^2
    std::vector<double> term;   // y(t)^2 * weight per requested t
    std::vector<double> ratio;  // y(t) / y(0)
    bool converged = false;
};

RefinedPair refine_eigenpair(const std::vector<double>& diag, double E0, const std::vector<std::int64_t>& ts,
                             long bits);

}  // namespace tml::detail
