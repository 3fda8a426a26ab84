#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stllab/infinite_plate.hpp"
#include "stllab/plate.hpp"

namespace stllab {

/// Which simply supported modes enter the sum.
struct ModalTruncation {
    int max_m = 40;
    int max_n = 40;
    double freq_factor = 3.0; // keep modes with |w_mn| <= freq_factor * w_max

    void validate() const {
        if (max_m < 1 || max_n < 1) throw ConfigError("modal truncation: max_m and max_n must be >= 1");
        if (!(freq_factor >= 1.0)) throw ConfigError("modal truncation: freq_factor must be >= 1");
    }
};

struct Mode {
    int m;
    int n;
    cplx omega_sq; // complex because D carries the loss factor
};

/// Retained modes, in (m, n) lexicographic order.
struct ModeSet {
    std::vector<Mode> modes;
    int max_m = 0;
    int max_n = 0;

    bool empty() const { return modes.empty(); }
    std::size_t size() const { return modes.size(); }
};

inline ModeSet select_modes(const PlateSpec& p, const ModalTruncation& trunc, double omega_max) {
    trunc.validate();
    const double limit = trunc.freq_factor * omega_max;
    const cplx d_over_m = bending_stiffness(p) / surface_mass_density(p);
    ModeSet set;
    for (int m = 1; m <= trunc.max_m; ++m) {
        for (int n = 1; n <= trunc.max_n; ++n) {
            const double kx = m * std::numbers::pi / p.a;
            const double ky = n * std::numbers::pi / p.b;
            const double k2 = kx * kx + ky * ky;
            const cplx w2 = d_over_m * (k2 * k2);
            if (std::sqrt(std::abs(w2)) <= limit) {
                set.modes.push_back({m, n, w2});
                set.max_m = std::max(set.max_m, m);
                set.max_n = std::max(set.max_n, n);
            }
        }
    }
    return set;
}

namespace detail {

/// int_0^L e^{-i kappa x} sin(m pi x / L) dx, closed form. The removable
/// singularity at kappa = +-m pi / L is absorbed into a sinc factor.
inline cplx sine_projection(int m, double kappa, double L) {
    const double q = m * std::numbers::pi / L;
    auto sinc = [](double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; };
    if (kappa >= 0.0) {
        const double delta = kappa - q;
        const double half = 0.5 * delta * L;
        return (-q / (q + kappa)) * cplx(0.0, L) * std::polar(1.0, -half) * sinc(half);
    }
    const double delta = kappa + q;
    const double half = 0.5 * delta * L;
    return (q / (q - kappa)) * cplx(0.0, L) * std::polar(1.0, -half) * sinc(half);
}

} // namespace detail

/// Modal coefficients p_I,mn of a unit-amplitude incident plane wave, one per retained mode.
inline std::vector<cplx> modal_pressure_coefficients(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                                     const ModeSet& modes) {
    p.validate();
    f.validate();
    const double kx = inc.kx(f);
    const double ky = inc.ky(f);
    std::vector<cplx> out;
    out.reserve(modes.size());
    const double scale = 4.0 / (p.a * p.b);
    for (const Mode& md : modes.modes)
        out.push_back(scale * detail::sine_projection(md.m, kx, p.a) * detail::sine_projection(md.n, ky, p.b));
    return out;
}

struct ModalTau {
    double tau = 0.0;
    bool degenerate = false; // every p_I,mn vanished; tau reported as 0
};

namespace detail {

/// Per-frequency constants of the uncoupled modal solution.
class ModalKernel {
public:
    ModalKernel(const PlateSpec& p, const FluidSpec& f, double omega, const ModeSet& modes)
        : modes_(&modes), a_(p.a), b_(p.b), m_(surface_mass_density(p)), rho0_(f.rho0), c0_(f.c0), omega_(omega) {
        ix_.resize(static_cast<std::size_t>(modes.max_m));
        iy_.resize(static_cast<std::size_t>(modes.max_n));
    }

    // [w_mn^2 - w^2 + 2 i w rho0 c0 / (m cos)] alpha = (2 / m) p_I,mn,
    // p_T,mn = i rho0 w^2 alpha / kz, tau = sum |p_T|^2 / sum |p_I|^2.
    ModalTau tau(double theta, double phi) {
        const double k = omega_ / c0_;
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        const double kx = k * st * std::cos(phi);
        const double ky = k * st * std::sin(phi);
        const double kz = k * ct;
        for (int m = 1; m <= modes_->max_m; ++m) ix_[static_cast<std::size_t>(m - 1)] = sine_projection(m, kx, a_);
        for (int n = 1; n <= modes_->max_n; ++n) iy_[static_cast<std::size_t>(n - 1)] = sine_projection(n, ky, b_);
        const double radiation = 2.0 * omega_ * rho0_ * c0_ / (m_ * ct);
        const double w2 = omega_ * omega_;
        const double gain = 2.0 * rho0_ * w2 / (m_ * kz);
        const double scale = 4.0 / (a_ * b_);
        double incident = 0.0;
        double transmitted = 0.0;
        for (const Mode& md : modes_->modes) {
            const double pin = std::norm(scale * ix_[static_cast<std::size_t>(md.m - 1)] *
                                         iy_[static_cast<std::size_t>(md.n - 1)]);
            const double re = md.omega_sq.real() - w2;
            const double im = md.omega_sq.imag() + radiation;
            incident += pin;
            transmitted += pin * gain * gain / (re * re + im * im);
        }
        if (!(incident > 0.0)) return {0.0, true};
        return {transmitted / incident, false};
    }

private:
    const ModeSet* modes_;
    double a_, b_, m_, rho0_, c0_, omega_;
    std::vector<cplx> ix_, iy_;
};

} // namespace detail

/// Plane-wave transparency of the simply supported plate by uncoupled modal summation.
inline ModalTau modal_summation_tau(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc,
                                    const ModeSet& modes) {
    detail::check_oblique(inc.theta, "modal_summation_tau");
    p.validate();
    f.validate();
    if (modes.empty()) return {0.0, true};
    detail::ModalKernel kernel(p, f, inc.omega, modes);
    return kernel.tau(inc.theta, inc.phi);
}

} // namespace stllab
