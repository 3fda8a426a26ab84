#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/dataset.hpp"
#include "stllab/plate.hpp"

namespace stllab {

/// Input feature sets: the 7 raw design variables, optionally followed by the
/// physics-guided terms m, D_R (and R).
enum class Recipe { base, physics, physics_r };

inline std::string to_string(Recipe r) {
    switch (r) {
    case Recipe::base: return "base";
    case Recipe::physics: return "physics";
    case Recipe::physics_r: return "physics_r";
    }
    return "?";
}

inline Recipe parse_recipe(const std::string& s) {
    if (s == "base") return Recipe::base;
    if (s == "physics") return Recipe::physics;
    if (s == "physics_r") return Recipe::physics_r;
    throw ValidationError("unknown feature recipe '" + s + "' (expected base, physics or physics_r)");
}

inline std::vector<std::string> feature_names(Recipe r) {
    std::vector<std::string> names(kDesignColumns.begin(), kDesignColumns.end());
    if (r != Recipe::base) {
        names.emplace_back("m");
        names.emplace_back("D_R");
    }
    if (r == Recipe::physics_r) names.emplace_back("R");
    return names;
}

/// Appends the recipe's physics-guided columns to raw design rows (design-table
/// units). Quantities are computed in SI.
inline Eigen::MatrixXd augment(const Eigen::MatrixXd& X_raw, Recipe r) {
    if (X_raw.cols() != static_cast<Eigen::Index>(kDesignDims))
        throw ValidationError("augment: expected 7 raw columns, got " + std::to_string(X_raw.cols()));
    const auto extra = static_cast<Eigen::Index>(feature_names(r).size()) - X_raw.cols();
    Eigen::MatrixXd out(X_raw.rows(), X_raw.cols() + extra);
    out.leftCols(X_raw.cols()) = X_raw;
    if (extra == 0) return out;
    for (Eigen::Index i = 0; i < X_raw.rows(); ++i) {
        const PlateSpec p = PlateSpec::from_design_row(X_raw.row(i));
        out(i, 7) = surface_mass_density(p);
        out(i, 8) = bending_stiffness_real(p);
        if (r == Recipe::physics_r) out(i, 9) = resonance_coefficient(p);
    }
    return out;
}

enum class ScalerKind { standardize, minmax };

/// Per-column affine map x' = (x - shift) / scale, learned on a fit set. No clipping.
struct Scaler {
    ScalerKind kind = ScalerKind::standardize;
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    static Scaler fit(const Eigen::MatrixXd& X, ScalerKind kind, const std::vector<std::string>& names = {}) {
        if (X.rows() < 2) throw ValidationError("scaler: need at least 2 rows to fit");
        Scaler s;
        s.kind = kind;
        s.shift.resize(X.cols());
        s.scale.resize(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const auto col = X.col(j);
            if (kind == ScalerKind::standardize) {
                const double mean = col.mean();
                const double var = (col.array() - mean).square().mean();
                s.shift(j) = mean;
                s.scale(j) = std::sqrt(var);
            } else {
                s.shift(j) = col.minCoeff();
                s.scale(j) = col.maxCoeff() - s.shift(j);
            }
            if (!(s.scale(j) > 0.0)) {
                const std::string name =
                    static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : std::to_string(j);
                throw ValidationError("scaler: column '" + name + "' is constant on the fit set");
            }
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        check(X);
        return (X.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
    }

    Eigen::MatrixXd invert(const Eigen::MatrixXd& Xs) const {
        check(Xs);
        return (Xs.array().rowwise() * scale.transpose().array()).matrix().rowwise() + shift.transpose();
    }

    nlohmann::json to_json() const {
        return {{"kind", kind == ScalerKind::standardize ? "standardize" : "minmax"},
                {"shift", std::vector<double>(shift.data(), shift.data() + shift.size())},
                {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
    }

    static Scaler from_json(const nlohmann::json& j) {
        Scaler s;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "standardize")
            s.kind = ScalerKind::standardize;
        else if (kind == "minmax")
            s.kind = ScalerKind::minmax;
        else
            throw ValidationError("scaler: unknown kind '" + kind + "'");
        const auto sh = j.at("shift").get<std::vector<double>>();
        const auto sc = j.at("scale").get<std::vector<double>>();
        if (sh.size() != sc.size()) throw ValidationError("scaler: shift/scale length mismatch");
        s.shift = Eigen::Map<const Eigen::VectorXd>(sh.data(), static_cast<Eigen::Index>(sh.size()));
        s.scale = Eigen::Map<const Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
        return s;
    }

private:
    void check(const Eigen::MatrixXd& X) const {
        if (X.cols() != shift.size())
            throw ValidationError("scaler: fitted on " + std::to_string(shift.size()) + " columns, got " +
                                  std::to_string(X.cols()));
    }
};

} // namespace stllab
