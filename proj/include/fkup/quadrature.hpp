#pragma once

#include <cmath>
#include <stdexcept>

namespace fkup {

// Thrown when a quadrature fails to reach its tolerance within the
// subdivision budget.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m));
    const double frm = f(0.5 * (m + b));
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    // Below this width the integrand values are dominated by the rounding
    // noise of their own evaluation (the substrate sum cancels to ~1e-16 near
    // the wells), so refining further only chases noise. The leaves accepted
    // here are confined to those noise bands and contribute O(noise * width).
    if (b - a < 1e-12)
        return left + right + err / 15.0;
    if (depth <= 0)
        throw NumericError("adaptive Simpson: subdivision limit reached");
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson rule with absolute tolerance. Handles a > b by sign.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// 8-point Gauss-Legendre rule mapped to [0,1]; exact through degree 15.
inline constexpr double kGaussNode[8] = {
    0.019855071751231856, 0.101666761293186630, 0.237233795041835510, 0.408282678752175100,
    0.591717321247824900, 0.762766204958164490, 0.898333238706813370, 0.980144928248768140};
inline constexpr double kGaussWeight[8] = {
    0.050614268145188130, 0.111190517226687230, 0.156853322938943640, 0.181341891689180970,
    0.181341891689180970, 0.156853322938943640, 0.111190517226687230, 0.050614268145188130};

// Integral over one cell of g composed with the affine chord from v0 to v1.
// Sampling happens in the chord parameter, so dilating `width` rescales the
// result exactly (bit-for-bit), which the scaling identity tests rely on.
template <class G>
double chord_integral(const G& g, double v0, double v1, double width) {
    if (v0 == v1) return g(v0) * width;
    double acc = 0.0;
    const double dv = v1 - v0;
    for (int k = 0; k < 8; ++k)
        acc += kGaussWeight[k] * g(v0 + kGaussNode[k] * dv);
    return acc * width;
}

} // namespace fkup
