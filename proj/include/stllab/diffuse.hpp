#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stllab/infinite_plate.hpp"
#include "stllab/modal.hpp"
#include "stllab/radiation.hpp"
#include "stllab/spectrum.hpp"

namespace stllab {

enum class StlModel { infinite, correction, modal };

inline std::string to_string(StlModel m) {
    switch (m) {
    case StlModel::infinite: return "infinite";
    case StlModel::correction: return "correction";
    case StlModel::modal: return "modal";
    }
    return "?";
}

inline StlModel parse_stl_model(const std::string& s) {
    if (s == "infinite") return StlModel::infinite;
    if (s == "correction") return StlModel::correction;
    if (s == "modal") return StlModel::modal;
    throw ValidationError("unknown STL model '" + s + "' (expected infinite, correction or modal)");
}

/// Gauss-Legendre rules for the diffuse-field average over theta in (0, theta_max)
/// and phi in (0, pi/2); the azimuth quarter is expanded 4-fold by the rectangle's
/// symmetry. When the coincidence angle lies inside the theta range of the
/// infinite/correction models, each side of it gets its own n_theta-point panel.
class QuadratureScheme {
public:
    QuadratureScheme() : QuadratureScheme(64, 16) {}

    QuadratureScheme(int n_theta, int n_phi, double theta_max = std::numbers::pi / 2,
                     bool split_at_coincidence = true)
        : n_theta_(n_theta), n_phi_(n_phi), theta_max_(theta_max), split_(split_at_coincidence) {
        if (n_theta < 2) throw ConfigError("quadrature: n_theta must be >= 2");
        if (n_phi < 1) throw ConfigError("quadrature: n_phi must be >= 1");
        if (!(theta_max > 0.0 && theta_max <= std::numbers::pi / 2))
            throw ConfigError("quadrature: theta_max must lie in (0, pi/2]");
        theta_rule_ = std::make_shared<GaussLegendre>(n_theta);
        phi_rule_ = std::make_shared<GaussLegendre>(n_phi);
    }

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    double theta_max() const { return theta_max_; }
    bool split_at_coincidence() const { return split_; }
    const GaussLegendre& theta_rule() const { return *theta_rule_; }
    const GaussLegendre& phi_rule() const { return *phi_rule_; }

    QuadratureScheme doubled() const { return QuadratureScheme(2 * n_theta_, 2 * n_phi_, theta_max_, split_); }

    /// Sum of w cos(theta) sin(theta) over the 2-D rule; pi when theta_max = pi/2.
    double denominator() const {
        double sum = 0.0;
        for (std::size_t i = 0; i < theta_rule_->size(); ++i) {
            const double t = theta_rule_->node(i, 0.0, theta_max_);
            sum += theta_rule_->weight(i, 0.0, theta_max_) * std::cos(t) * std::sin(t);
        }
        double phi_sum = 0.0;
        for (std::size_t j = 0; j < phi_rule_->size(); ++j)
            phi_sum += 4.0 * phi_rule_->weight(j, 0.0, std::numbers::pi / 2);
        return sum * phi_sum;
    }

private:
    int n_theta_;
    int n_phi_;
    double theta_max_;
    bool split_;
    std::shared_ptr<const GaussLegendre> theta_rule_;
    std::shared_ptr<const GaussLegendre> phi_rule_;
};

/// Numeric configuration shared by every simulated curve.
struct SimulationConfig {
    FluidSpec fluid{};
    QuadratureScheme quad{};
    ModalTruncation truncation{};
    RadiationOptions radiation{};
};

namespace detail {

inline std::vector<std::pair<double, double>> theta_panels(StlModel model, const PlateSpec& p, const FluidSpec& f,
                                                           double omega, const QuadratureScheme& q) {
    const double top = q.theta_max();
    if (q.split_at_coincidence() && model != StlModel::modal) {
        const double ratio = critical_frequency(p, f) / (omega / (2.0 * std::numbers::pi));
        if (ratio < 1.0) {
            const double tc = std::asin(std::sqrt(ratio));
            if (tc > 0.0 && tc < top) return {{0.0, tc}, {tc, top}};
        }
    }
    return {{0.0, top}};
}

[[noreturn]] inline void rethrow_at_node(const std::exception& e, double theta, double phi, double omega) {
    throw NumericError(std::string(e.what()) + " [at theta=" + format_double(theta) + ", phi=" + format_double(phi) +
                       ", omega=" + format_double(omega) + "]");
}

} // namespace detail

/// Diffuse-field transparency: sum w tau cos sin / sum w cos sin over the rule.
/// `modes` is required for the modal model and ignored otherwise.
inline double diffuse_tau(StlModel model, const PlateSpec& p, const FluidSpec& f, double omega,
                          const QuadratureScheme& q, const ModeSet* modes = nullptr,
                          const RadiationOptions& radiation = {}) {
    p.validate();
    f.validate();
    if (!(omega > 0.0)) throw ValidationError("diffuse_tau: omega must be > 0");
    if (model == StlModel::modal && modes == nullptr) throw ConfigError("diffuse_tau: modal model needs a mode set");

    const auto panels = detail::theta_panels(model, p, f, omega, q);
    const GaussLegendre& tr = q.theta_rule();
    const GaussLegendre& pr = q.phi_rule();
    const double quarter = std::numbers::pi / 2;

    const detail::InfinitePlateKernel inf(p, f);
    std::optional<detail::RadiationKernel> rad;
    std::optional<detail::ModalKernel> modal;
    if (model == StlModel::correction) rad.emplace(p.a, p.b, omega / f.c0, radiation);
    if (model == StlModel::modal) modal.emplace(p, f, omega, *modes);

    double num = 0.0;
    double den = 0.0;
    for (const auto& [lo, hi] : panels) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double theta = tr.node(i, lo, hi);
            const double wt = tr.weight(i, lo, hi) * std::cos(theta) * std::sin(theta);
            if (model == StlModel::infinite) {
                // azimuth-independent: the phi integral is the constant 2 pi
                double t = inf.tau(theta, omega);
                if (!std::isfinite(t)) detail::rethrow_at_node(NumericError("non-finite tau"), theta, 0.0, omega);
                num += 2.0 * std::numbers::pi * wt * t;
                den += 2.0 * std::numbers::pi * wt;
                continue;
            }
            double row = 0.0;
            double row_w = 0.0;
            const double kt = omega / f.c0 * std::sin(theta);
            for (std::size_t j = 0; j < pr.size(); ++j) {
                const double phi = pr.node(j, 0.0, quarter);
                const double wp = 4.0 * pr.weight(j, 0.0, quarter);
                double t = 0.0;
                try {
                    if (model == StlModel::correction) {
                        const double sigma = rad->evaluate(kt * std::cos(phi), kt * std::sin(phi));
                        t = sigma * std::cos(theta) * inf.tau(theta, omega);
                    } else {
                        t = modal->tau(theta, phi).tau;
                    }
                } catch (const std::exception& e) {
                    detail::rethrow_at_node(e, theta, phi, omega);
                }
                if (!std::isfinite(t)) detail::rethrow_at_node(NumericError("non-finite tau"), theta, phi, omega);
                row += wp * t;
                row_w += wp;
            }
            num += wt * row;
            den += wt * row_w;
        }
    }
    return num / den;
}

/// Narrowband STL curve, -10 log10(tau_d), on the given grid.
inline StlCurve stl_curve(StlModel model, const PlateSpec& p, const FrequencyGrid& grid,
                          const SimulationConfig& cfg = {}) {
    p.validate();
    ModeSet modes;
    if (model == StlModel::modal) modes = select_modes(p, cfg.truncation, 2.0 * std::numbers::pi * grid.max());
    StlCurve c;
    c.frequencies = grid.values();
    c.stl_db.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double omega = 2.0 * std::numbers::pi * grid[i];
        const double tau = diffuse_tau(model, p, cfg.fluid, omega, cfg.quad, &modes, cfg.radiation);
        if (!(tau > 0.0))
            throw NumericError("stl_curve: diffuse transparency " + format_double(tau) + " at " +
                               format_double(grid[i]) + " Hz is not positive");
        c.stl_db[i] = stl_from_tau(tau);
    }
    return c;
}

} // namespace stllab
