#include "precise_eigen.hpp"

#include <cmath>
#include <deque>
#include <mpfr.h>

namespace tml::detail {

namespace {

struct Mp {
    mpfr_t v;
    explicit Mp(long bits) { mpfr_init2(v, bits); }
    ~Mp() { mpfr_clear(v); }
    Mp(const Mp&) = delete;
    Mp& operator=(const Mp&) = delete;
};

}  // namespace

RefinedPair refine_eigenpair(const std::vector<double>& diag, double E0, const std::vector<std::int64_t>& ts,
                             long bits) {
    const auto N = static_cast<std::int64_t>(diag.size());
    Mp E(bits), a(bits), y(bits), ym(bits), yn(bits), d(bits), dm(bits), dn(bits), tmp(bits), delta(bits), tol(bits);
    mpfr_set_d(E.v, E0, MPFR_RNDN);
    RefinedPair out;
    for (int it = 0; it < 200; ++it) {
        mpfr_set_ui(ym.v, 0, MPFR_RNDN);
        mpfr_set_ui(y.v, 1, MPFR_RNDN);
        mpfr_set_ui(dm.v, 0, MPFR_RNDN);
        mpfr_set_ui(d.v, 0, MPFR_RNDN);
        for (std::int64_t i = 0; i < N; ++i) {
            mpfr_sub_d(a.v, E.v, diag[static_cast<std::size_t>(i)], MPFR_RNDN);
            // dn = y + a d - dm
            mpfr_mul(tmp.v, a.v, d.v, MPFR_RNDN);
            mpfr_add(dn.v, tmp.v, y.v, MPFR_RNDN);
            mpfr_sub(dn.v, dn.v, dm.v, MPFR_RNDN);
            // yn = a y - ym
            mpfr_mul(tmp.v, a.v, y.v, MPFR_RNDN);
            mpfr_sub(yn.v, tmp.v, ym.v, MPFR_RNDN);
            mpfr_swap(ym.v, y.v);
            mpfr_swap(y.v, yn.v);
            mpfr_swap(dm.v, d.v);
            mpfr_swap(d.v, dn.v);
        }
        if (mpfr_zero_p(d.v)) break;
        mpfr_div(delta.v, y.v, d.v, MPFR_RNDN);
        mpfr_sub(E.v, E.v, delta.v, MPFR_RNDN);
        // |delta| <= 2^(16 - bits) max(1, |E|)
        mpfr_abs(tmp.v, E.v, MPFR_RNDN);
        if (mpfr_cmp_ui(tmp.v, 1) < 0) mpfr_set_ui(tmp.v, 1, MPFR_RNDN);
        mpfr_mul_2si(tol.v, tmp.v, 16 - bits, MPFR_RNDN);
        mpfr_abs(delta.v, delta.v, MPFR_RNDN);
        if (mpfr_cmp(delta.v, tol.v) <= 0) {
            out.converged = true;
            break;
        }
    }
    out.E = mpfr_get_d(E.v, MPFR_RNDN);

    // eigenvector pass: sum of squares and y(t)
    std::deque<Mp> yt;
    for (std::size_t j = 0; j < ts.size(); ++j) mpfr_set_ui(yt.emplace_back(bits).v, 0, MPFR_RNDN);
    Mp sum(bits);
    mpfr_set_ui(ym.v, 0, MPFR_RNDN);
    mpfr_set_ui(y.v, 1, MPFR_RNDN);
    mpfr_set_ui(sum.v, 0, MPFR_RNDN);
    for (std::int64_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < ts.size(); ++j)
            if (ts[j] == i) mpfr_set(yt[j].v, y.v, MPFR_RNDN);
        mpfr_sqr(tmp.v, y.v, MPFR_RNDN);
        mpfr_add(sum.v, sum.v, tmp.v, MPFR_RNDN);
        mpfr_sub_d(a.v, E.v, diag[static_cast<std::size_t>(i)], MPFR_RNDN);
        mpfr_mul(tmp.v, a.v, y.v, MPFR_RNDN);
        mpfr_sub(yn.v, tmp.v, ym.v, MPFR_RNDN);
        mpfr_swap(ym.v, y.v);
        mpfr_swap(y.v, yn.v);
    }
    mpfr_ui_div(tmp.v, 1, sum.v, MPFR_RNDN);
    out.weight = mpfr_get_d(tmp.v, MPFR_RNDN);
    for (auto& v : yt) {
        out.ratio.push_back(mpfr_get_d(v.v, MPFR_RNDN));
        mpfr_sqr(v.v, v.v, MPFR_RNDN);
        mpfr_mul(v.v, v.v, tmp.v, MPFR_RNDN);
        out.term.push_back(mpfr_get_d(v.v, MPFR_RNDN));
    }
    return out;
}

}  // namespace tml::detail
