#pragma once

#include <cmath>

namespace tml {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Mat2 {
    double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    // Adjugate; equals the inverse when det = 1.
    Mat2 adjugate() const { return {a22, -a12, -a21, a11}; }
    bool finite() const {
        return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
    }

    Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Mat2 operator*(const Mat2& b) const {
        return {a11 * b.a11 + a12 * b.a21, a11 * b.a12 + a12 * b.a22,
                a21 * b.a11 + a22 * b.a21, a21 * b.a12 + a22 * b.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Mat2 operator+(const Mat2& b) const { return {a11 + b.a11, a12 + b.a12, a21 + b.a21, a22 + b.a22}; }
    Mat2 operator-(const Mat2& b) const { return {a11 - b.a11, a12 - b.a12, a21 - b.a21, a22 - b.a22}; }
};

inline Mat2 rotation(double c, double s) { return {c, -s, s, c}; }

// Largest singular value. Uses sigma_1 +- sigma_2 = |(a11 +- a22, a21 -+ a12)|, which is the
// closed form of the Gram-matrix eigenvalues without the cancelling discriminant.
inline double opnorm(const Mat2& m) {
    double p = std::hypot(m.a11 + m.a22, m.a21 - m.a12);
    double q = std::hypot(m.a11 - m.a22, m.a21 + m.a12);
    return 0.5 * (p + q);
}

inline double min_singular(const Mat2& m) {
    double p = std::hypot(m.a11 + m.a22, m.a21 - m.a12);
    double q = std::hypot(m.a11 - m.a22, m.a21 + m.a12);
    return 0.5 * std::abs(p - q);
}

// Frobenius-induced max norm used for entrywise comparisons.
inline double max_abs_entry(const Mat2& m) {
    return std::fmax(std::fmax(std::abs(m.a11), std::abs(m.a12)), std::fmax(std::abs(m.a21), std::abs(m.a22)));
}

// [[E - v, -1], [1, 0]]. Throws DomainError on non-finite input.
Mat2 step_matrix(double v, double E);
// Inverse of step_matrix(v, E): [[0, 1], [-1, E - v]].
Mat2 inverse_step_matrix(double v, double E);

}  // namespace tml
