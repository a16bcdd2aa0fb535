#pragma once

#include "tml/mat2.hpp"

namespace tml {

struct ScaledVec {
    Vec2 v;                  // T x = exp(log_scale) * v
    double log_scale = 0.0;
    double log_norm() const;
};

// A unimodular 2x2 matrix held in polar form T = U diag(t, 1/t) V^T with U, V rotations and
// log t >= 0 stored separately, so products of any length neither overflow nor lose
// unimodularity. mat() is the de-scaled matrix T / t, whose operator norm is exactly 1.
class ScaledProduct {
public:
    ScaledProduct() = default;

    // m must be unimodular (det = 1); it is refactored, not rescaled.
    static ScaledProduct from_matrix(const Mat2& m);

    // T <- a T, a unimodular.
    void push(const Mat2& a);

    double log_scale() const { return log_t_; }
    double log_norm() const { return log_t_; }
    Mat2 mat() const;
    Mat2 value() const;  // exp(log_scale) * mat(); may overflow for long products
    double descaled_det() const;  // det(mat) * exp(2 log_scale), evaluated on the factors

    ScaledVec apply(Vec2 x) const;
    double log_norm_applied(Vec2 x) const { return apply(x).log_norm(); }

    // Angle theta in [0, pi) with u = (cos theta, sin theta) the right singular direction of
    // the smallest singular value 1/t.
    double contracting_angle() const;
    // Right singular direction of the largest singular value t.
    Vec2 expanding_direction() const { return {cv_, sv_}; }

    ScaledProduct inverse() const;
    friend ScaledProduct operator*(const ScaledProduct& a, const ScaledProduct& b);

private:
    double cu_ = 1.0, su_ = 0.0;  // U
    double cv_ = 1.0, sv_ = 0.0;  // V
    double log_t_ = 0.0;
};

}  // namespace tml
