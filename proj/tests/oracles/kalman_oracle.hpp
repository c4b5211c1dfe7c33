#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace uotkit::oracle {

using Mat = std::vector<std::vector<long double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<long double>(c, 0.0)); }

inline Mat eye(std::size_t n) {
    Mat m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat c = zeros(a.size(), b[0].size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t = zeros(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

inline Mat add(const Mat& a, const Mat& b, long double sb = 1.0) {
    Mat c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) c[i][j] += sb * b[i][j];
    return c;
}

/// Gauss-Jordan with partial pivoting.
inline Mat inverse(Mat a) {
    const std::size_t n = a.size();
    Mat inv = eye(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw std::runtime_error("singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const long double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const long double f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

/// Textbook constant-velocity box filter on dense matrices, in extended
/// precision so its own rounding stays well below the comparison tolerance.
struct DenseKalman {
    std::vector<long double> x = std::vector<long double>(7, 0.0);
    Mat p = zeros(7, 7);
    std::array<double, 7> q = {1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-2, 1e-4};
    std::array<double, 4> r = {1.0, 1.0, 10.0, 1e-1};

    static Mat f() {
        Mat m = eye(7);
        m[0][4] = m[1][5] = m[2][6] = 1.0;
        return m;
    }
    static Mat h() {
        Mat m = zeros(4, 7);
        for (std::size_t i = 0; i < 4; ++i) m[i][i] = 1.0;
        return m;
    }

    void init(long double bx, long double by, long double bw, long double bh) {
        x = {bx + bw / 2.0, by + bh / 2.0, bw * bh, bw / bh, 0.0, 0.0, 0.0};
        const long double s = bw * bh;
        const long double d[7] = {10.0, 10.0, 10.0 * s, 1e-2, 1e4, 1e4, 1e4 * s};
        p = zeros(7, 7);
        for (std::size_t i = 0; i < 7; ++i) p[i][i] = d[i];
    }

    void predict() {
        const Mat fm = f();
        std::vector<long double> nx(7, 0.0);
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 7; ++j) nx[i] += fm[i][j] * x[j];
        if (nx[2] <= 0.0) {
            nx[2] = x[2];
            nx[6] = 0.0;
        }
        x = nx;
        p = mul(mul(fm, p), transpose(fm));
        for (std::size_t i = 0; i < 7; ++i) p[i][i] += q[i];
    }

    void update(long double bx, long double by, long double bw, long double bh) {
        const Mat hm = h();
        const long double z[4] = {bx + bw / 2.0, by + bh / 2.0, bw * bh, bw / bh};
        Mat s = mul(mul(hm, p), transpose(hm));
        for (std::size_t i = 0; i < 4; ++i) s[i][i] += r[i];
        const Mat k = mul(mul(p, transpose(hm)), inverse(s));
        std::vector<long double> y(4);
        for (std::size_t i = 0; i < 4; ++i) y[i] = z[i] - x[i];
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 4; ++j) x[i] += k[i][j] * y[j];
        p = mul(add(eye(7), mul(k, hm), -1.0), p);
        const Mat pt = transpose(p);
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 7; ++j) p[i][j] = 0.5 * (p[i][j] + pt[i][j]);
    }
};

/// Comparison scale per state component: positions and their velocities
/// share px, s and s' share px^2, r is unitless.
inline long double mean_scale(const DenseKalman& k, std::size_t i) {
    const long double pos = std::max({1.0L, std::fabs(k.x[0]), std::fabs(k.x[1])});
    const long double area = std::max(1.0L, std::fabs(k.x[2]));
    const long double ratio = std::max(1.0L, std::fabs(k.x[3]));
    const long double scale[7] = {pos, pos, area, ratio, pos, pos, area};
    return scale[i];
}

inline long double cov_scale(const DenseKalman& k, std::size_t r, std::size_t c) {
    return std::max(1.0L, std::sqrt(std::fabs(k.p[r][r] * k.p[c][c])));
}

}  // namespace uotkit::oracle
