#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "stllab/error.hpp"
#include "stllab/format.hpp"

namespace stllab {

using cplx = std::complex<double>;

/// Isotropic rectangular plate, SI units throughout. eta is a fraction (0.01 = 1 %).
struct PlateSpec {
    double rho = 0.0; // kg/m^3
    double E = 0.0;   // Pa
    double nu = 0.0;
    double eta = 0.0;
    double h = 0.0; // m
    double a = 0.0; // m, extent along x
    double b = 0.0; // m, extent along y

    void validate() const {
        auto bad = [](const char* field, double v, const char* rule) {
            throw ValidationError(std::string("invalid plate: ") + field + " = " + format_double(v) + " (" + rule + ")");
        };
        auto positive = [&](const char* field, double v) {
            if (!(v > 0.0) || !std::isfinite(v)) bad(field, v, "must be finite and > 0");
        };
        positive("rho", rho);
        positive("E", E);
        positive("h", h);
        positive("a", a);
        positive("b", b);
        if (!(nu >= 0.0 && nu < 0.5)) bad("nu", nu, "must satisfy 0 <= nu < 0.5");
        if (!(eta >= 0.0) || !std::isfinite(eta)) bad("eta", eta, "must be finite and >= 0");
    }

    /// Builds a plate from the design-table units: rho kg/m^3, E GPa, nu, eta %, h mm, a m, b m.
    static PlateSpec from_design_units(double rho, double E_gpa, double nu, double eta_percent, double h_mm,
                                       double a, double b) {
        PlateSpec p{rho, E_gpa * 1e9, nu, eta_percent * 1e-2, h_mm * 1e-3, a, b};
        p.validate();
        return p;
    }

    /// Row layout of design matrices: rho, E, nu, eta, h, a, b in design-table units.
    template <class Row>
    static PlateSpec from_design_row(const Row& r) {
        return from_design_units(r[0], r[1], r[2], r[3], r[4], r[5], r[6]);
    }

    std::array<double, 7> design_row() const { return {rho, E * 1e-9, nu, eta * 1e2, h * 1e3, a, b}; }
};

/// Ambient fluid on both sides of the plate.
struct FluidSpec {
    double rho0 = 1.21; // kg/m^3
    double c0 = 343.0;  // m/s

    void validate() const {
        if (!(rho0 > 0.0) || !std::isfinite(rho0))
            throw ValidationError("invalid fluid: rho0 = " + format_double(rho0) + " (must be > 0)");
        if (!(c0 > 0.0) || !std::isfinite(c0))
            throw ValidationError("invalid fluid: c0 = " + format_double(c0) + " (must be > 0)");
    }

    static FluidSpec air() { return {}; }
};

/// Plane wave hitting the plate from the source side.
struct WaveIncidence {
    double theta = 0.0; // polar angle from the plate normal, rad
    double phi = 0.0;   // azimuth, rad
    double omega = 0.0; // rad/s

    double wavenumber(const FluidSpec& f) const { return omega / f.c0; }
    double kx(const FluidSpec& f) const { return wavenumber(f) * std::sin(theta) * std::cos(phi); }
    double ky(const FluidSpec& f) const { return wavenumber(f) * std::sin(theta) * std::sin(phi); }
    double kz(const FluidSpec& f) const { return wavenumber(f) * std::cos(theta); }
};

/// Complex flexural rigidity E h^3 / (12 (1 - nu^2)) * (1 + i eta).
inline cplx bending_stiffness(const PlateSpec& p) {
    p.validate();
    const double dr = p.E * p.h * p.h * p.h / (12.0 * (1.0 - p.nu * p.nu));
    return {dr, dr * p.eta};
}

inline double bending_stiffness_real(const PlateSpec& p) { return bending_stiffness(p).real(); }

inline double surface_mass_density(const PlateSpec& p) {
    p.validate();
    return p.rho * p.h;
}

/// D_R / (m a^4 b^4); uses the real part of the bending stiffness.
inline double resonance_coefficient(const PlateSpec& p) {
    const double a4 = p.a * p.a * p.a * p.a;
    const double b4 = p.b * p.b * p.b * p.b;
    return bending_stiffness_real(p) / (surface_mass_density(p) * a4 * b4);
}

/// Lowest coincidence frequency (grazing incidence), Hz.
inline double critical_frequency(const PlateSpec& p, const FluidSpec& f) {
    f.validate();
    return f.c0 * f.c0 / (2.0 * std::numbers::pi) * std::sqrt(surface_mass_density(p) / bending_stiffness_real(p));
}

/// Frequency (Hz) at which the trace wavenumber at angle theta matches the bending wavenumber.
inline double coincidence_frequency(const PlateSpec& p, const FluidSpec& f, double theta) {
    if (!(theta > 0.0 && theta <= std::numbers::pi / 2))
        throw DomainError("coincidence_frequency: theta = " + format_double(theta) +
                          " outside (0, pi/2]; no coincidence at normal incidence");
    const double s = std::sin(theta);
    return critical_frequency(p, f) / (s * s);
}

/// Complex natural angular frequency of the simply supported (m, n) mode.
inline cplx natural_frequency(const PlateSpec& p, int m_idx, int n_idx) {
    if (m_idx < 1 || n_idx < 1)
        throw ValidationError("natural_frequency: mode indices must be >= 1, got (" + std::to_string(m_idx) + ", " +
                              std::to_string(n_idx) + ")");
    const double kx = m_idx * std::numbers::pi / p.a;
    const double ky = n_idx * std::numbers::pi / p.b;
    const double k2 = kx * kx + ky * ky;
    const cplx omega_sq = bending_stiffness(p) / surface_mass_density(p) * (k2 * k2);
    return std::sqrt(omega_sq);
}

// JSON ingestion. Keys are fixed: rho, E (GPa), nu, eta_percent, h_mm, a, b.
inline PlateSpec plate_from_json(const nlohmann::json& j) {
    auto get = [&](const char* key) {
        if (!j.contains(key)) throw ValidationError(std::string("plate JSON: missing key '") + key + "'");
        if (!j.at(key).is_number()) throw ValidationError(std::string("plate JSON: key '") + key + "' is not a number");
        return j.at(key).get<double>();
    };
    const double rho = get("rho"), E = get("E"), nu = get("nu"), eta = get("eta_percent"), h = get("h_mm");
    const double a = get("a"), b = get("b");
    return PlateSpec::from_design_units(rho, E, nu, eta, h, a, b);
}

inline nlohmann::json plate_to_json(const PlateSpec& p) {
    const auto r = p.design_row();
    return {{"rho", r[0]}, {"E", r[1]}, {"nu", r[2]}, {"eta_percent", r[3]}, {"h_mm", r[4]}, {"a", r[5]}, {"b", r[6]}};
}

inline FluidSpec fluid_from_json(const nlohmann::json& j) {
    FluidSpec f;
    if (j.contains("rho0")) f.rho0 = j.at("rho0").get<double>();
    if (j.contains("c0")) f.c0 = j.at("c0").get<double>();
    f.validate();
    return f;
}

} // namespace stllab
