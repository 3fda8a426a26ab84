#pragma once

#include <cmath>
#include <numbers>

#include "stllab/plate.hpp"

namespace stllab {

namespace detail {

inline void check_oblique(double theta, const char* op) {
    if (!(theta >= 0.0 && theta < std::numbers::pi / 2))
        throw DomainError(std::string(op) + ": theta = " + format_double(theta) + " outside [0, pi/2)");
}

/// Plate/fluid constants of the infinite-plate transparency, validated once.
struct InfinitePlateKernel {
    cplx D;
    double m;
    double rho0;
    double c0;

    InfinitePlateKernel(const PlateSpec& p, const FluidSpec& f)
        : D(bending_stiffness(p)), m(surface_mass_density(p)), rho0(f.rho0), c0(f.c0) {
        f.validate();
    }

    cplx impedance(double theta, double omega) const {
        const double s = std::sin(theta);
        const double s4 = s * s * s * s;
        const double c4 = c0 * c0 * c0 * c0;
        return (1.0 - omega * omega * D * s4 / (m * c4)) * cplx(0.0, omega * m);
    }

    double tau(double theta, double omega) const {
        const cplx r = 1.0 + impedance(theta, omega) * std::cos(theta) / (2.0 * rho0 * c0);
        return 1.0 / std::norm(r);
    }
};

} // namespace detail

/// Structural impedance of the unbounded plate, (1 - w^2 D sin^4(theta) / (m c0^4)) i w m.
inline cplx infinite_plate_impedance(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc) {
    detail::check_oblique(inc.theta, "infinite_plate_impedance");
    return detail::InfinitePlateKernel(p, f).impedance(inc.theta, inc.omega);
}

/// Plane-wave transparency |1 + Z cos(theta) / (2 rho0 c0)|^-2.
inline double infinite_plate_tau(const PlateSpec& p, const FluidSpec& f, const WaveIncidence& inc) {
    detail::check_oblique(inc.theta, "infinite_plate_tau");
    return detail::InfinitePlateKernel(p, f).tau(inc.theta, inc.omega);
}

} // namespace stllab
