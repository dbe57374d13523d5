#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "liegeo/errors.hpp"

namespace liegeo {

// Truncated univariate power series about 0, coefficients c[0..order].
// All arithmetic truncates at the common order of the operands.
class Series1 {
public:
    Series1() : c_(1, 0.0) {}
    explicit Series1(int order) : c_(order + 1, 0.0) {}
    Series1(int order, double constant) : c_(order + 1, 0.0) { c_[0] = constant; }
    explicit Series1(std::vector<double> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.assign(1, 0.0);
    }

    static Series1 variable(int order, double scale = 1.0) {
        Series1 s(order);
        if (order >= 1) s.c_[1] = scale;
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    double operator[](int k) const { return k <= order() ? c_[k] : 0.0; }
    double& at(int k) { return c_[k]; }
    const std::vector<double>& coeffs() const { return c_; }

    Series1 truncated(int new_order) const {
        Series1 r(new_order);
        for (int k = 0; k <= new_order && k <= order(); ++k) r.c_[k] = c_[k];
        return r;
    }

    Series1 operator-() const {
        Series1 r = *this;
        for (double& x : r.c_) x = -x;
        return r;
    }

    friend Series1 operator+(const Series1& a, const Series1& b) {
        int n = std::max(a.order(), b.order());
        Series1 r(n);
        for (int k = 0; k <= n; ++k) r.c_[k] = a[k] + b[k];
        return r;
    }
    friend Series1 operator-(const Series1& a, const Series1& b) {
        int n = std::max(a.order(), b.order());
        Series1 r(n);
        for (int k = 0; k <= n; ++k) r.c_[k] = a[k] - b[k];
        return r;
    }
    friend Series1 operator*(const Series1& a, const Series1& b) {
        int n = std::max(a.order(), b.order());
        Series1 r(n);
        for (int i = 0; i <= std::min(n, a.order()); ++i) {
            if (a.c_[i] == 0.0) continue;
            for (int j = 0; j <= std::min(n - i, b.order()); ++j)
                r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return r;
    }
    friend Series1 operator*(double s, const Series1& a) {
        Series1 r = a;
        for (double& x : r.c_) x *= s;
        return r;
    }
    friend Series1 operator*(const Series1& a, double s) { return s * a; }
    friend Series1 operator+(const Series1& a, double s) {
        Series1 r = a;
        r.c_[0] += s;
        return r;
    }
    friend Series1 operator-(const Series1& a, double s) { return a + (-s); }

    Series1& operator+=(const Series1& b) { return *this = *this + b; }
    Series1& operator-=(const Series1& b) { return *this = *this - b; }

    Series1 derivative() const {
        int n = order();
        Series1 r(n);
        for (int k = 1; k <= n; ++k) r.c_[k - 1] = k * c_[k];
        return r;
    }

    // Antiderivative with zero constant term; top coefficient is dropped.
    Series1 antiderivative() const {
        int n = order();
        Series1 r(n);
        for (int k = 0; k < n; ++k) r.c_[k + 1] = c_[k] / (k + 1);
        return r;
    }

    // Multiplicative inverse; requires nonzero constant term.
    Series1 inverse() const {
        if (c_[0] == 0.0) throw OrderSolveFailure("series inverse of zero constant term");
        int n = order();
        Series1 r(n);
        r.c_[0] = 1.0 / c_[0];
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j) s += (*this)[j] * r.c_[k - j];
            r.c_[k] = -s / c_[0];
        }
        return r;
    }

    // Square root branch with sqrt(c0) > 0; requires positive constant term.
    Series1 sqrt() const {
        if (c_[0] <= 0.0) throw OrderSolveFailure("series sqrt of nonpositive constant term");
        int n = order();
        Series1 r(n);
        r.c_[0] = std::sqrt(c_[0]);
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int j = 1; j < k; ++j) s += r.c_[j] * r.c_[k - j];
            r.c_[k] = (c_[k] - s) / (2.0 * r.c_[0]);
        }
        return r;
    }

    // Composition (this ∘ g); requires g(0) = 0.
    Series1 compose(const Series1& g) const {
        if (g[0] != 0.0) throw OrderSolveFailure("series composition needs g(0) = 0");
        int n = std::max(order(), g.order());
        Series1 r(n, c_[0]);
        Series1 p(n, 1.0);
        for (int k = 1; k <= order(); ++k) {
            p = p * g;
            r = r + c_[k] * p;
        }
        return r;
    }

    // Compositional inverse: returns s with s(this(t)) = t.
    // Requires c0 = 0 and c1 != 0. Newton iteration on composition.
    Series1 reversion() const {
        if (c_[0] != 0.0 || c_[1] == 0.0)
            throw OrderSolveFailure("series reversion needs f(0) = 0, f'(0) != 0");
        int n = order();
        Series1 s = Series1::variable(n, 1.0 / c_[1]);
        for (int it = 0; it < n + 2; ++it) {
            Series1 err = s.compose(*this) - Series1::variable(n);
            Series1 ds = s.derivative().compose(*this);
            s = s - err * ds.inverse();
        }
        return s;
    }

    double eval(double t) const {
        double acc = 0.0;
        for (int k = order(); k >= 0; --k) acc = acc * t + c_[k];
        return acc;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double x : c_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    std::vector<double> c_;
};

// Truncated bivariate power series about (0,0) with total degree <= order.
// Coefficient (m,n) multiplies u^m v^n; storage is triangular row-major
// over diagonals: index(m,n) = T(m+n) + n with T(k) = k(k+1)/2.
class Series2 {
public:
    Series2() : order_(0), c_(1, 0.0) {}
    explicit Series2(int order) : order_(order), c_(size_for(order), 0.0) {}
    Series2(int order, double constant) : Series2(order) { c_[0] = constant; }

    static int size_for(int order) { return (order + 1) * (order + 2) / 2; }
    static int index(int m, int n) {
        int k = m + n;
        return k * (k + 1) / 2 + n;
    }

    static Series2 var_u(int order, double scale = 1.0) {
        Series2 s(order);
        if (order >= 1) s.set(1, 0, scale);
        return s;
    }
    static Series2 var_v(int order, double scale = 1.0) {
        Series2 s(order);
        if (order >= 1) s.set(0, 1, scale);
        return s;
    }

    int order() const { return order_; }
    double get(int m, int n) const {
        return (m >= 0 && n >= 0 && m + n <= order_) ? c_[index(m, n)] : 0.0;
    }
    void set(int m, int n, double value) {
        assert(m >= 0 && n >= 0 && m + n <= order_);
        c_[index(m, n)] = value;
    }
    void add(int m, int n, double value) {
        assert(m >= 0 && n >= 0 && m + n <= order_);
        c_[index(m, n)] += value;
    }

    Series2 operator-() const {
        Series2 r = *this;
        for (double& x : r.c_) x = -x;
        return r;
    }
    friend Series2 operator+(const Series2& a, const Series2& b) {
        int n = std::max(a.order_, b.order_);
        Series2 r(n);
        for (int m = 0; m <= n; ++m)
            for (int k = 0; k + m <= n; ++k) r.set(m, k, a.get(m, k) + b.get(m, k));
        return r;
    }
    friend Series2 operator-(const Series2& a, const Series2& b) {
        int n = std::max(a.order_, b.order_);
        Series2 r(n);
        for (int m = 0; m <= n; ++m)
            for (int k = 0; k + m <= n; ++k) r.set(m, k, a.get(m, k) - b.get(m, k));
        return r;
    }
    friend Series2 operator*(const Series2& a, const Series2& b) {
        int n = std::max(a.order_, b.order_);
        Series2 r(n);
        for (int am = 0; am <= a.order_; ++am)
            for (int an = 0; am + an <= a.order_; ++an) {
                double ca = a.get(am, an);
                if (ca == 0.0) continue;
                int rem = n - am - an;
                if (rem < 0) continue;
                for (int bm = 0; bm <= std::min(b.order_, rem); ++bm)
                    for (int bn = 0; bm + bn <= std::min(b.order_, rem); ++bn) {
                        if (am + bm + an + bn > n) continue;
                        double cb = b.get(bm, bn);
                        if (cb == 0.0) continue;
                        r.add(am + bm, an + bn, ca * cb);
                    }
            }
        return r;
    }
    friend Series2 operator*(double s, const Series2& a) {
        Series2 r = a;
        for (double& x : r.c_) x *= s;
        return r;
    }
    friend Series2 operator*(const Series2& a, double s) { return s * a; }
    friend Series2 operator+(const Series2& a, double s) {
        Series2 r = a;
        r.c_[0] += s;
        return r;
    }
    friend Series2 operator-(const Series2& a, double s) { return a + (-s); }
    Series2& operator+=(const Series2& b) { return *this = *this + b; }
    Series2& operator-=(const Series2& b) { return *this = *this - b; }

    Series2 du() const {
        Series2 r(order_);
        for (int m = 1; m <= order_; ++m)
            for (int n = 0; m + n <= order_; ++n) r.set(m - 1, n, m * get(m, n));
        return r;
    }
    Series2 dv() const {
        Series2 r(order_);
        for (int m = 0; m <= order_; ++m)
            for (int n = 1; m + n <= order_; ++n) r.set(m, n - 1, n * get(m, n));
        return r;
    }

    Series2 inverse() const {
        if (c_[0] == 0.0) throw OrderSolveFailure("series inverse of zero constant term");
        Series2 r(order_);
        r.c_[0] = 1.0 / c_[0];
        // Order-by-order: coefficients of (this * r - 1) at total degree k
        // determine r's degree-k coefficients.
        for (int k = 1; k <= order_; ++k) {
            for (int m = k; m >= 0; --m) {
                int n = k - m;
                double s = 0.0;
                for (int i = 0; i <= m; ++i)
                    for (int j = 0; j <= n; ++j) {
                        if (i + j == 0) continue;
                        s += get(i, j) * r.get(m - i, n - j);
                    }
                r.set(m, n, -s / c_[0]);
            }
        }
        return r;
    }

    Series2 sqrt() const {
        if (c_[0] <= 0.0) throw OrderSolveFailure("series sqrt of nonpositive constant term");
        Series2 r(order_);
        double r0 = std::sqrt(c_[0]);
        r.c_[0] = r0;
        for (int k = 1; k <= order_; ++k) {
            for (int m = k; m >= 0; --m) {
                int n = k - m;
                double s = 0.0;
                for (int i = 0; i <= m; ++i)
                    for (int j = 0; j <= n; ++j) {
                        int d = i + j;
                        if (d == 0 || d == k) continue;
                        s += r.get(i, j) * r.get(m - i, n - j);
                    }
                r.set(m, n, (get(m, n) - s) / (2.0 * r0));
            }
        }
        return r;
    }

    double eval(double u, double v) const {
        double acc = 0.0;
        for (int k = order_; k >= 0; --k) {
            double diag = 0.0;
            for (int n = k; n >= 0; --n) {
                double term = get(k - n, n);
                double p = 1.0;
                for (int i = 0; i < n; ++i) p *= v;
                for (int i = 0; i < k - n; ++i) p *= u;
                diag += term * p;
            }
            acc += diag;
        }
        return acc;
    }

    // Restriction to the anti-diagonal u = t, v = -t.
    Series1 restrict_antidiagonal() const {
        Series1 r(order_);
        for (int k = 0; k <= order_; ++k) {
            double s = 0.0;
            for (int n = 0; n <= k; ++n) s += get(k - n, n) * ((n % 2) ? -1.0 : 1.0);
            r.at(k) = s;
        }
        return r;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double x : c_) m = std::max(m, std::abs(x));
        return m;
    }

    double max_abs_coeff_through(int max_order) const {
        double m = 0.0;
        for (int k = 0; k <= std::min(max_order, order_); ++k)
            for (int n = 0; n <= k; ++n) m = std::max(m, std::abs(get(k - n, n)));
        return m;
    }

private:
    int order_;
    std::vector<double> c_;
};

} // namespace liegeo
