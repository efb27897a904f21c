#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace layerctl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : y; }
    constexpr double& operator[](int i) { return i == 0 ? x : y; }

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// 2x2 matrix, m(i, j) is row i, column j. For a velocity gradient m(i, j) = d_j u_i.
struct Mat2 {
    std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

    constexpr double operator()(int i, int j) const { return a[2 * i + j]; }
    constexpr double& operator()(int i, int j) { return a[2 * i + j]; }
    constexpr double trace() const { return a[0] + a[3]; }

    static constexpr Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
    static constexpr Mat2 zero() { return Mat2{}; }
};

constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m(0, 0) * v.x + m(0, 1) * v.y, m(1, 0) * v.x + m(1, 1) * v.y};
}
constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
    return r;
}
constexpr Mat2 operator*(double s, Mat2 m) {
    for (double& v : m.a) v *= s;
    return m;
}
constexpr Mat2 operator+(Mat2 a, const Mat2& b) {
    for (int i = 0; i < 4; ++i) a.a[i] += b.a[i];
    return a;
}
constexpr Mat2 operator-(Mat2 a, const Mat2& b) {
    for (int i = 0; i < 4; ++i) a.a[i] -= b.a[i];
    return a;
}
constexpr Mat2 transpose(const Mat2& m) { return Mat2{{m.a[0], m.a[2], m.a[1], m.a[3]}}; }
constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
    return Mat2{{a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}};
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Box {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    bool contains(const Vec2& p, double tol = 0.0) const {
        return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
    }
    /// Euclidean distance from p to the closed rectangle (0 inside).
    double distance(const Vec2& p) const {
        const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
        const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
        return std::hypot(dx, dy);
    }
    Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

}  // namespace layerctl
