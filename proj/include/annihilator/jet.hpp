#pragma once

#include <array>
#include <cmath>

namespace annihilator {

/// Truncated Taylor jet: a value together with derivatives 1..Order at a
/// point. Used to evaluate the flat-step ramp and the bump profile together
/// with their derivatives analytically (no finite differencing).
template <int Order>
struct Jet {
    static_assert(Order >= 1 && Order <= 8);

    std::array<double, Order + 1> d{}; // d[k] = k-th derivative, d[0] = value

    static Jet constant(double v) {
        Jet j;
        j.d[0] = v;
        return j;
    }

    /// Identity jet at v: value v, first derivative 1.
    static Jet variable(double v) {
        Jet j;
        j.d[0] = v;
        j.d[1] = 1.0;
        return j;
    }

    Jet operator-() const {
        Jet r;
        for (int k = 0; k <= Order; ++k) r.d[k] = -d[k];
        return r;
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k <= Order; ++k) r.d[k] = a.d[k] + b.d[k];
        return r;
    }

    friend Jet operator-(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k <= Order; ++k) r.d[k] = a.d[k] - b.d[k];
        return r;
    }

    friend Jet operator*(double c, const Jet& a) {
        Jet r;
        for (int k = 0; k <= Order; ++k) r.d[k] = c * a.d[k];
        return r;
    }

    friend Jet operator+(const Jet& a, double c) {
        Jet r = a;
        r.d[0] += c;
        return r;
    }

    friend Jet operator-(double c, const Jet& a) {
        Jet r = -a;
        r.d[0] += c;
        return r;
    }

    // Leibniz product rule.
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k <= Order; ++k) {
            double s = 0.0;
            for (int i = 0; i <= k; ++i) s += binom(k, i) * a.d[i] * b.d[k - i];
            r.d[k] = s;
        }
        return r;
    }

    // Solve a = q*b for q, coefficient by coefficient.
    friend Jet operator/(const Jet& a, const Jet& b) {
        Jet q;
        for (int k = 0; k <= Order; ++k) {
            double s = a.d[k];
            for (int i = 0; i < k; ++i) s -= binom(k, i) * q.d[i] * b.d[k - i];
            q.d[k] = s / b.d[0];
        }
        return q;
    }

    /// exp(a) via the recurrence e' = a'·e.
    friend Jet exp(const Jet& a) {
        Jet e;
        e.d[0] = std::exp(a.d[0]);
        for (int k = 1; k <= Order; ++k) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += binom(k - 1, i) * a.d[k - i] * e.d[i];
            e.d[k] = s;
        }
        return e;
    }

    static constexpr double binom(int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    }
};

using Jet4 = Jet<4>;

} // namespace annihilator
