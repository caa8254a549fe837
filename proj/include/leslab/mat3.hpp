#pragma once

#include <array>
#include <cmath>

namespace leslab {

using Vec3 = std::array<double, 3>;

/// Dense 3x3 real matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    constexpr double& operator()(int i, int j) { return a[3 * i + j]; }
    constexpr double operator()(int i, int j) const { return a[3 * i + j]; }

    static constexpr Mat3 identity()
    {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }

    static constexpr Mat3 diag(double x, double y, double z)
    {
        Mat3 m;
        m(0, 0) = x;
        m(1, 1) = y;
        m(2, 2) = z;
        return m;
    }

    constexpr Mat3& operator+=(const Mat3& o)
    {
        for (int i = 0; i < 9; ++i)
            a[i] += o.a[i];
        return *this;
    }
    constexpr Mat3& operator-=(const Mat3& o)
    {
        for (int i = 0; i < 9; ++i)
            a[i] -= o.a[i];
        return *this;
    }
    constexpr Mat3& operator*=(double s)
    {
        for (auto& x : a)
            x *= s;
        return *this;
    }
    constexpr bool operator==(const Mat3&) const = default;
};

constexpr Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
constexpr Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
constexpr Mat3 operator*(double s, Mat3 x) { return x *= s; }

constexpr Mat3 operator*(const Mat3& x, const Mat3& y)
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
    return r;
}

constexpr Mat3 transpose(const Mat3& x)
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = x(j, i);
    return r;
}

constexpr double trace(const Mat3& x) { return x(0, 0) + x(1, 1) + x(2, 2); }

/// Double contraction x_ij y_ij.
constexpr double contract(const Mat3& x, const Mat3& y)
{
    double s = 0.0;
    for (int i = 0; i < 9; ++i)
        s += x.a[i] * y.a[i];
    return s;
}

inline double frobenius(const Mat3& x) { return std::sqrt(contract(x, x)); }

}  // namespace leslab
