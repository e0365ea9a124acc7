// SPDX-License-Identifier: MIT
/**
 * @file complex.hpp
 * @brief Minimal complex arithmetic over an arbitrary real type.
 *
 * std::complex is only specified for float, double and long double, so the
 * extended-precision kernels use this small value type instead. Functions are
 * found by ADL for multiprecision reals and by the using-declarations below
 * for builtin ones.
 */
#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>

namespace stable_exit {

/// 64 significant decimal digits; roughly 40 more than double.
using hp_real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<64>,
                                              boost::multiprecision::et_off>;

template <class R>
struct Cx {
    R re{0};
    R im{0};

    Cx() = default;
    Cx(R r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
    Cx(R r, R i) : re(std::move(r)), im(std::move(i)) {}

    template <class S>
    static Cx from(const std::complex<S>& z) {
        return {R(z.real()), R(z.imag())};
    }
    template <class S>
    static Cx from(const Cx<S>& z) {
        return {static_cast<R>(z.re), static_cast<R>(z.im)};
    }
    [[nodiscard]] std::complex<double> to_std() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }

    Cx& operator+=(const Cx& o) { re += o.re; im += o.im; return *this; }
    Cx& operator-=(const Cx& o) { re -= o.re; im -= o.im; return *this; }
    Cx& operator*=(const Cx& o) {
        R r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = std::move(r);
        return *this;
    }
    Cx& operator*=(const R& s) { re *= s; im *= s; return *this; }
    Cx& operator/=(const Cx& o) {
        R d = o.re * o.re + o.im * o.im;
        R r = (re * o.re + im * o.im) / d;
        im = (im * o.re - re * o.im) / d;
        re = std::move(r);
        return *this;
    }
    Cx& operator/=(const R& s) { re /= s; im /= s; return *this; }
};

template <class R> Cx<R> operator+(Cx<R> a, const Cx<R>& b) { return a += b; }
template <class R> Cx<R> operator-(Cx<R> a, const Cx<R>& b) { return a -= b; }
template <class R> Cx<R> operator*(Cx<R> a, const Cx<R>& b) { return a *= b; }
template <class R> Cx<R> operator/(Cx<R> a, const Cx<R>& b) { return a /= b; }
template <class R> Cx<R> operator*(Cx<R> a, const R& s) { return a *= s; }
template <class R> Cx<R> operator*(const R& s, Cx<R> a) { return a *= s; }
template <class R> Cx<R> operator/(Cx<R> a, const R& s) { return a /= s; }
template <class R> Cx<R> operator-(const Cx<R>& a) { return {-a.re, -a.im}; }
template <class R> Cx<R> conj(const Cx<R>& a) { return {a.re, -a.im}; }

template <class R>
R cabs(const Cx<R>& a) {
    using std::hypot;
    return hypot(a.re, a.im);
}
/// |re| + |im|: within a factor sqrt(2) of the modulus and much cheaper.
template <class R>
R cabs1(const Cx<R>& a) {
    using std::abs;
    return abs(a.re) + abs(a.im);
}
template <class R>
R carg(const Cx<R>& a) {
    using std::atan2;
    return atan2(a.im, a.re);
}
template <class R>
Cx<R> cexp(const Cx<R>& a) {
    using std::cos;
    using std::exp;
    using std::sin;
    R m = exp(a.re);
    return {m * cos(a.im), m * sin(a.im)};
}
/// Principal logarithm, imaginary part in (-pi, pi].
template <class R>
Cx<R> clog(const Cx<R>& a) {
    using std::log;
    return {log(cabs(a)), carg(a)};
}
/// Principal power a^p for a != 0.
template <class R>
Cx<R> cpow(const Cx<R>& a, const R& p) {
    return cexp(clog(a) * p);
}

}  // namespace stable_exit
