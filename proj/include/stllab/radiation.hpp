#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stllab/infinite_plate.hpp"
#include "stllab/plate.hpp"
#include "stllab/quadrature.hpp"

namespace stllab {

// Forced radiation efficiency of a baffled rectangular plate driven by a trace
// wave (kx, ky):
//
//   sigma = Re(Z_fin) / (rho0 c0),
//   Z_fin = (i w rho0 / S) int_S int_S e^{-i kt.x} G(x, x') e^{+i kt.x'} dS dS',
//   G = e^{-ikr} / (2 pi r).
//
// Fast path: the surface integral depends only on x - x', which leaves
//
//   sigma = 2k / (pi S) int_0^{pi/2} da int_0^{R(a)} (a - r cos)(b - r sin)
//           cos(kx r cos) cos(ky r sin) sin(kr) dr
//
// with R(a) = min(a / cos, b / sin). The radial integral is closed form; the
// angular one uses Gauss-Legendre on the two sectors either side of atan(b/a).

struct RadiationOptions {
    int base_order = 8;            // nodes per sector at k -> 0
    double nodes_per_radian = 0.6; // extra nodes per radian of k * diagonal
    int fixed_order = 0;           // > 0 overrides the adaptive rule

    int order(double k, double a, double b) const {
        if (fixed_order > 0) return fixed_order;
        const double diag = std::hypot(a, b);
        return base_order + static_cast<int>(std::ceil(nodes_per_radian * k * diag));
    }
};

namespace detail {

/// int_0^1 t^p sin(x t) dt for p = 0, 1, 2.
struct SineMoments {
    double j0, j1, j2;
};

inline SineMoments sine_moments(double x, double sx, double cx) {
    if (std::abs(x) < 1.0) {
        // Alternating series; 10 terms reach double precision for |x| < 1.
        double j0 = 0.0, j1 = 0.0, j2 = 0.0;
        double term = x; // (-1)^j x^(2j+1) / (2j+1)!
        for (int j = 0; j < 10; ++j) {
            j0 += term / (2 * j + 2);
            j1 += term / (2 * j + 3);
            j2 += term / (2 * j + 4);
            term *= -x * x / ((2.0 * j + 2.0) * (2.0 * j + 3.0));
        }
        return {j0, j1, j2};
    }
    const double x2 = x * x;
    return {(1.0 - cx) / x, (sx - x * cx) / x2, (2.0 * x * sx - (x2 - 2.0) * cx - 2.0) / (x2 * x)};
}

/// Precomputed angular nodes for one (a, b, k); evaluate() is called per (kx, ky).
class RadiationKernel {
public:
    RadiationKernel(double a, double b, double k, const RadiationOptions& opt = {}) : a_(a), b_(b), k_(k) {
        const GaussLegendre rule(opt.order(k, a, b));
        const double split = std::atan2(b, a);
        nodes_.reserve(2 * rule.size());
        auto add_sector = [&](double lo, double hi, bool x_edge) {
            for (std::size_t i = 0; i < rule.size(); ++i) {
                Node nd;
                const double alpha = rule.node(i, lo, hi);
                nd.w = rule.weight(i, lo, hi);
                nd.c = std::cos(alpha);
                nd.s = std::sin(alpha);
                nd.R = x_edge ? a / nd.c : b / nd.s;
                nd.ekr = std::polar(1.0, k * nd.R);
                nd.p0 = a * b;
                nd.p1 = -(a * nd.s + b * nd.c) * nd.R;
                nd.p2 = nd.c * nd.s * nd.R * nd.R;
                nodes_.push_back(nd);
            }
        };
        add_sector(0.0, split, true);
        add_sector(split, std::numbers::pi / 2, false);
        prefactor_ = 2.0 * k / (std::numbers::pi * a * b);
    }

    double evaluate(double kx, double ky) const {
        double sum = 0.0;
        for (const Node& nd : nodes_) {
            const double A = kx * nd.c * nd.R;
            const double B = ky * nd.s * nd.R;
            const cplx eA = std::polar(1.0, A);
            const cplx eB = std::polar(1.0, B);
            const cplx eApB = eA * eB;
            const cplx eAmB = eA * std::conj(eB);
            const double kR = k_ * nd.R;
            // kappa R = kR +- A +- B; e^{i kappa R} from the products above.
            const cplx e[4] = {nd.ekr * eApB, nd.ekr * eAmB, nd.ekr * std::conj(eAmB), nd.ekr * std::conj(eApB)};
            const double x[4] = {kR + A + B, kR + A - B, kR - A + B, kR - A - B};
            double acc = 0.0;
            for (int q = 0; q < 4; ++q) {
                const SineMoments jm = sine_moments(x[q], e[q].imag(), e[q].real());
                acc += nd.p0 * jm.j0 + nd.p1 * jm.j1 + nd.p2 * jm.j2;
            }
            sum += nd.w * nd.R * 0.25 * acc;
        }
        return prefactor_ * sum;
    }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        double w, c, s, R;
        cplx ekr;
        double p0, p1, p2; // polynomial coefficients in t = r / R, scaled by R^p
    };
    double a_, b_, k_;
    double prefactor_ = 0.0;
    std::vector<Node> nodes_;
};

} // namespace detail

/// Fast-path radiation efficiency sigma_R(theta, phi, a, b) at the incidence frequency.
inline double finite_radiation_efficiency(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                          const RadiationOptions& opt = {}) {
    detail::check_oblique(inc.theta, "finite_radiation_efficiency");
    p.validate();
    f.validate();
    const double k = inc.wavenumber(f);
    return detail::RadiationKernel(p.a, p.b, k, opt).evaluate(inc.kx(f), inc.ky(f));
}

/// As above, but refines the angular rule once (order doubled) and fails if the
/// two estimates differ by more than rel_tol.
inline double finite_radiation_efficiency_checked(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                                  double rel_tol = 1e-3, const RadiationOptions& opt = {}) {
    const double coarse = finite_radiation_efficiency(p, f, inc, opt);
    RadiationOptions fine = opt;
    fine.fixed_order = 2 * opt.order(inc.wavenumber(f), p.a, p.b);
    const double refined = finite_radiation_efficiency(p, f, inc, fine);
    if (std::abs(refined - coarse) > rel_tol * std::max(std::abs(refined), 1e-12))
        throw NumericError("radiation efficiency did not converge: estimates " + format_double(coarse) + " and " +
                           format_double(refined));
    return refined;
}

/// Finite-size correction: tau_fin = sigma_R cos(theta) tau_inf.
inline double correction_factor_tau(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                    const RadiationOptions& opt = {}) {
    const double sigma = finite_radiation_efficiency(p, f, inc, opt);
    return sigma * std::cos(inc.theta) * infinite_plate_tau(p, f, inc);
}

struct DirectRadiationOptions {
    int outer_order = 0;  // per plate dimension; 0 = adaptive
    int angle_order = 0;  // per triangle; 0 = adaptive
    int radial_order = 0; // 0 = adaptive
};

/// Reference evaluation of the full surface integral. For every outer point the
/// inner integral is taken in polar coordinates centered on that point (four
/// triangles, one per plate edge), which cancels the 1/r singularity of G.
inline double radiation_efficiency_direct(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                          const DirectRadiationOptions& opt = {}) {
    detail::check_oblique(inc.theta, "radiation_efficiency_direct");
    p.validate();
    f.validate();
    const double k = inc.wavenumber(f);
    const double kx = inc.kx(f);
    const double ky = inc.ky(f);
    const double a = p.a, b = p.b;
    const double diag = std::hypot(a, b);
    const double phase = k * diag;

    auto pick = [](int requested, int adaptive) { return requested > 0 ? requested : adaptive; };
    const GaussLegendre outer_x(pick(opt.outer_order, 16 + static_cast<int>(std::ceil(0.8 * k * a))));
    const GaussLegendre outer_y(pick(opt.outer_order, 16 + static_cast<int>(std::ceil(0.8 * k * b))));
    const GaussLegendre angle(pick(opt.angle_order, 12 + static_cast<int>(std::ceil(0.5 * phase))));
    const GaussLegendre radial(pick(opt.radial_order, 12 + static_cast<int>(std::ceil(0.5 * phase))));

    constexpr double two_pi = 2.0 * std::numbers::pi;
    cplx total{0.0, 0.0};
    for (std::size_t ix = 0; ix < outer_x.size(); ++ix) {
        const double x = outer_x.node(ix, 0.0, a);
        const double wx = outer_x.weight(ix, 0.0, a);
        for (std::size_t iy = 0; iy < outer_y.size(); ++iy) {
            const double y = outer_y.node(iy, 0.0, b);
            const double wy = outer_y.weight(iy, 0.0, b);
            const double c1 = std::atan2(-y, a - x);
            const double c2 = std::atan2(b - y, a - x);
            const double c3 = std::atan2(b - y, -x);
            const double c4 = std::atan2(-y, -x) + two_pi;
            struct Edge {
                double lo, hi, normal, dist;
            };
            const Edge edges[4] = {{c1, c2, 0.0, a - x},
                                   {c2, c3, std::numbers::pi / 2, b - y},
                                   {c3, c4, std::numbers::pi, x},
                                   {c4, c1 + two_pi, 1.5 * std::numbers::pi, y}};
            cplx inner{0.0, 0.0};
            for (const Edge& e : edges) {
                for (std::size_t ia = 0; ia < angle.size(); ++ia) {
                    const double beta = angle.node(ia, e.lo, e.hi);
                    const double wb = angle.weight(ia, e.lo, e.hi);
                    const double rmax = e.dist / std::cos(beta - e.normal);
                    const double lambda = kx * std::cos(beta) + ky * std::sin(beta) - k;
                    cplx radial_sum{0.0, 0.0};
                    for (std::size_t ir = 0; ir < radial.size(); ++ir) {
                        const double r = radial.node(ir, 0.0, rmax);
                        radial_sum += radial.weight(ir, 0.0, rmax) * std::polar(1.0, lambda * r);
                    }
                    inner += wb * radial_sum;
                }
            }
            total += wx * wy * inner / two_pi;
        }
    }
    // sigma = Re(i k / S * total)
    return -k / (a * b) * total.imag();
}

} // namespace stllab
