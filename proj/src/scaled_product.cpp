#include "tml/scaled_product.hpp"

#include <cmath>
#include <numbers>

#include "tml/errors.hpp"

namespace tml {

namespace {

struct Polar {
    double cu, su;  // left singular direction of sigma
    double cz, sz;  // right singular direction of sigma
    double log_sigma;
};

// Largest singular triple of a nonsingular 2x2 matrix.
Polar polar_of(const Mat2& m) {
    double p = m.a11 * m.a11 + m.a21 * m.a21;
    double r = m.a12 * m.a12 + m.a22 * m.a22;
    double q = m.a11 * m.a12 + m.a21 * m.a22;
    double x = p - r;
    double y = 2.0 * q;
    double h = std::hypot(x, y);
    double cz = 1.0, sz = 0.0;
    if (h > 0.0) {
        // half-angle of (x, y) without trig
        if (x >= 0.0) {
            cz = std::sqrt(0.5 * (1.0 + x / h));
            sz = y / (2.0 * h * cz);
        } else {
            sz = std::copysign(std::sqrt(0.5 * (1.0 - x / h)), y);
            cz = y / (2.0 * h * sz);
        }
    }
    double sigma = std::sqrt(0.5 * (p + r + h));
    Vec2 u = m * Vec2{cz, sz};
    double un = std::hypot(u.x, u.y);
    if (!(un > 0.0) || !std::isfinite(un)) throw DomainError("polar factorisation of a singular or non-finite matrix");
    return {u.x / un, u.y / un, cz, sz, std::log(sigma)};
}

void renormalize(double& c, double& s) {
    double n = std::sqrt(c * c + s * s);
    c /= n;
    s /= n;
}

}  // namespace

double ScaledVec::log_norm() const { return log_scale + std::log(std::hypot(v.x, v.y)); }

ScaledProduct ScaledProduct::from_matrix(const Mat2& m) {
    if (!m.finite()) throw DomainError("non-finite matrix");
    Polar pl = polar_of(m);
    ScaledProduct out;
    out.cu_ = pl.cu;
    out.su_ = pl.su;
    out.cv_ = pl.cz;
    out.sv_ = pl.sz;
    out.log_t_ = pl.log_sigma;
    return out;
}

void ScaledProduct::push(const Mat2& a) {
    double e = std::exp(-2.0 * log_t_);
    // a U diag(1, e), the de-scaled left factor
    Mat2 m{a.a11 * cu_ + a.a12 * su_, (-a.a11 * su_ + a.a12 * cu_) * e,
           a.a21 * cu_ + a.a22 * su_, (-a.a21 * su_ + a.a22 * cu_) * e};
    Polar pl = polar_of(m);
    cu_ = pl.cu;
    su_ = pl.su;
    double cv = cv_ * pl.cz - sv_ * pl.sz;
    double sv = sv_ * pl.cz + cv_ * pl.sz;
    renormalize(cv, sv);
    cv_ = cv;
    sv_ = sv;
    log_t_ += pl.log_sigma;
}

Mat2 ScaledProduct::mat() const {
    double e = std::exp(-2.0 * log_t_);
    // U diag(1, e) V^T
    Mat2 ud{cu_, -su_ * e, su_, cu_ * e};
    Mat2 vt{cv_, sv_, -sv_, cv_};
    return ud * vt;
}

Mat2 ScaledProduct::value() const { return mat() * std::exp(log_t_); }

double ScaledProduct::descaled_det() const { return (cu_ * cu_ + su_ * su_) * (cv_ * cv_ + sv_ * sv_); }

ScaledVec ScaledProduct::apply(Vec2 x) const {
    double e = std::exp(-2.0 * log_t_);
    double w1 = cv_ * x.x + sv_ * x.y;
    double w2 = (-sv_ * x.x + cv_ * x.y) * e;
    return {{cu_ * w1 - su_ * w2, su_ * w1 + cu_ * w2}, log_t_};
}

double ScaledProduct::contracting_angle() const {
    double th = std::atan2(cv_, -sv_);
    if (th < 0.0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    return th;
}

ScaledProduct ScaledProduct::inverse() const {
    // V diag(1/t, t) U^T = (V R) diag(t, 1/t) (U R)^T with R the quarter turn
    ScaledProduct out;
    out.cu_ = -sv_;
    out.su_ = cv_;
    out.cv_ = -su_;
    out.sv_ = cu_;
    out.log_t_ = log_t_;
    return out;
}

ScaledProduct operator*(const ScaledProduct& a, const ScaledProduct& b) {
    double ca = a.cv_ * b.cu_ + a.sv_ * b.su_;
    double sa = a.cv_ * b.su_ - a.sv_ * b.cu_;
    double e1 = std::exp(-2.0 * a.log_t_);
    double e2 = std::exp(-2.0 * b.log_t_);
    Mat2 m{ca, -sa * e2, sa * e1, ca * e1 * e2};
    Polar pl = polar_of(m);
    ScaledProduct out;
    out.cu_ = a.cu_ * pl.cu - a.su_ * pl.su;
    out.su_ = a.su_ * pl.cu + a.cu_ * pl.su;
    out.cv_ = b.cv_ * pl.cz - b.sv_ * pl.sz;
    out.sv_ = b.sv_ * pl.cz + b.cv_ * pl.sz;
    renormalize(out.cu_, out.su_);
    renormalize(out.cv_, out.sv_);
    out.log_t_ = a.log_t_ + b.log_t_ + pl.log_sigma;
    return out;
}

Mat2 step_matrix(double v, double E) {
    if (!std::isfinite(v) || !std::isfinite(E)) throw DomainError("step_matrix: non-finite input");
    return {E - v, -1.0, 1.0, 0.0};
}

Mat2 inverse_step_matrix(double v, double E) {
    if (!std::isfinite(v) || !std::isfinite(E)) throw DomainError("inverse_step_matrix: non-finite input");
    return {0.0, 1.0, -1.0, E - v};
}

}  // namespace tml
