#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/format.hpp"
#include "stllab/lbfgsb.hpp"
#include "stllab/parallel.hpp"
#include "stllab/random.hpp"

namespace stllab {

/// k(x, x') = amplitude * Matern3/2(r; matern_length) + RBF(r; rbf_length) + noise * [x == x'].
struct GprHyper {
    double amplitude = 1.0;
    double matern_length = 1.0;
    double rbf_length = 1.0;
    double noise = 1.0;

    Eigen::Vector4d log_vector() const {
        return {std::log(amplitude), std::log(matern_length), std::log(rbf_length), std::log(noise)};
    }
    static GprHyper from_log(const Eigen::Vector4d& t) {
        return {std::exp(t(0)), std::exp(t(1)), std::exp(t(2)), std::exp(t(3))};
    }
};

struct GprOptions {
    GprHyper init{};
    bool optimize = true;
    int restarts = 10;
    double lower = 1e-5;
    double upper = 1e5;
    LbfgsbOptions lbfgs{};
};

namespace detail {

/// Covariance without the noise term, for a pair at distance r.
inline double gpr_cross(const GprHyper& h, double r) {
    const double s = std::sqrt(3.0) * r / h.matern_length;
    return h.amplitude * (1.0 + s) * std::exp(-s) + std::exp(-0.5 * r * r / (h.rbf_length * h.rbf_length));
}

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd D(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i) D(i, j) = (A.row(i) - B.row(j)).norm();
    return D;
}

} // namespace detail

/// Training-set covariance factorization, with jitter added on failure.
struct GprFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

inline bool gpr_factor(Eigen::MatrixXd K, GprFactor& out) {
    for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        if (jitter > 0.0) K.diagonal().array() += jitter - out.jitter;
        out.jitter = jitter;
        out.llt.compute(K);
        if (out.llt.info() == Eigen::Success) {
            const auto d = out.llt.matrixLLT().diagonal();
            if ((d.array() > 0.0).all() && d.allFinite()) return true;
        }
    }
    return false;
}

/// Log marginal likelihood summed over the columns of Y, and its gradient with
/// respect to the log hyperparameters. Returns -inf when the covariance cannot
/// be factored even with the largest jitter.
inline double gpr_log_marginal_likelihood(const Eigen::MatrixXd& dist, const Eigen::MatrixXd& Y, const GprHyper& h,
                                          Eigen::Vector4d* grad = nullptr) {
    const Eigen::Index n = dist.rows();
    const double F = static_cast<double>(Y.cols());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) K(i, j) = detail::gpr_cross(h, dist(i, j));
    K.diagonal().array() += h.noise;
    GprFactor fac;
    if (!gpr_factor(K, fac)) return -std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd alpha = fac.llt.solve(Y);
    const double logdet = 2.0 * fac.llt.matrixLLT().diagonal().array().log().sum();
    const double lml =
        -0.5 * Y.cwiseProduct(alpha).sum() - 0.5 * F * logdet - 0.5 * F * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!grad) return lml;

    // 0.5 tr((alpha alpha^T - F K^-1) dK)
    Eigen::MatrixXd W = alpha * alpha.transpose();
    W.noalias() -= F * fac.llt.solve(Eigen::MatrixXd::Identity(n, n));
    double gc = 0.0, gm = 0.0, gr = 0.0;
    const double sq3 = std::sqrt(3.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = dist(i, j);
            const double s = sq3 * r / h.matern_length;
            const double e = std::exp(-s);
            const double q = r * r / (h.rbf_length * h.rbf_length);
            const double w = W(i, j);
            gc += w * h.amplitude * (1.0 + s) * e;
            gm += w * h.amplitude * s * s * e;
            gr += w * std::exp(-0.5 * q) * q;
        }
    }
    *grad = {0.5 * gc, 0.5 * gm, 0.5 * gr, 0.5 * h.noise * W.trace()};
    return lml;
}

/// Zero-mean GP regressor with one shared kernel for all outputs.
class GaussianProcess {
public:
    void fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const GprOptions& opt, std::uint64_t seed,
             int threads = 1) {
        if (X.rows() != Y.rows()) throw ValidationError("gpr: X and Y row counts differ");
        if (X.rows() < 1) throw ValidationError("gpr: no training rows");
        if (opt.restarts < 0) throw ValidationError("gpr: restarts must be >= 0");
        X_ = X;
        const Eigen::MatrixXd dist = detail::pairwise_distances(X, X);
        hyper_ = opt.init;

        if (opt.optimize) {
            const Eigen::Vector4d lo = Eigen::Vector4d::Constant(std::log(opt.lower));
            const Eigen::Vector4d hi = Eigen::Vector4d::Constant(std::log(opt.upper));
            std::vector<Eigen::Vector4d> starts{opt.init.log_vector()};
            Rng rng(derive_seed(seed, 0));
            for (int r = 0; r < opt.restarts; ++r) {
                Eigen::Vector4d s;
                for (int k = 0; k < 4; ++k) s(k) = rng.uniform(lo(k), hi(k));
                starts.push_back(s);
            }
            std::vector<LbfgsbResult> results(starts.size());
            parallel_for(starts.size(), threads, [&](std::size_t i) {
                auto objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
                    Eigen::Vector4d gl;
                    const double v = gpr_log_marginal_likelihood(dist, Y, GprHyper::from_log(t), &gl);
                    if (!std::isfinite(v)) {
                        g = Eigen::VectorXd::Zero(4);
                        return std::numeric_limits<double>::infinity();
                    }
                    g = -gl;
                    return -v;
                };
                try {
                    results[i] = lbfgsb_minimize(objective, starts[i], lo, hi, opt.lbfgs);
                } catch (const NumericError&) {
                    results[i].f = std::numeric_limits<double>::infinity();
                }
            });
            std::size_t best = results.size();
            for (std::size_t i = 0; i < results.size(); ++i)
                if (std::isfinite(results[i].f) && (best == results.size() || results[i].f < results[best].f))
                    best = i;
            if (best == results.size())
                throw NumericError("gpr: covariance could not be factored from any start (n=" +
                                   std::to_string(X.rows()) + ")");
            hyper_ = GprHyper::from_log(results[best].x);
            iterations_ = results[best].iterations;
        }

        Eigen::MatrixXd K(X.rows(), X.rows());
        for (Eigen::Index j = 0; j < X.rows(); ++j)
            for (Eigen::Index i = 0; i < X.rows(); ++i) K(i, j) = detail::gpr_cross(hyper_, dist(i, j));
        K.diagonal().array() += hyper_.noise;
        GprFactor fac;
        if (!gpr_factor(K, fac)) {
            const Eigen::VectorXd eig = K.selfadjointView<Eigen::Lower>().eigenvalues();
            throw NumericError("gpr: covariance is not positive definite even with jitter 1e-6 (n=" +
                               std::to_string(X.rows()) + ", min eigenvalue " + format_double(eig.minCoeff()) +
                               ", max eigenvalue " + format_double(eig.maxCoeff()) + ", noise " +
                               format_double(hyper_.noise) + ")");
        }
        jitter_ = fac.jitter;
        alpha_ = fac.llt.solve(Y);
        lml_ = gpr_log_marginal_likelihood(dist, Y, hyper_);
    }

    /// Posterior mean; the noise term is not part of the cross-covariance.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const {
        if (X.cols() != X_.cols())
            throw ValidationError("gpr: expected " + std::to_string(X_.cols()) + " inputs, got " +
                                  std::to_string(X.cols()));
        Eigen::MatrixXd Ks = detail::pairwise_distances(X, X_);
        Ks = Ks.unaryExpr([&](double r) { return detail::gpr_cross(hyper_, r); });
        return Ks * alpha_;
    }

    const GprHyper& hyper() const { return hyper_; }
    double log_marginal_likelihood() const { return lml_; }
    double jitter() const { return jitter_; }
    int iterations() const { return iterations_; }

    nlohmann::json to_json() const {
        return {{"amplitude", hyper_.amplitude},
                {"matern_length", hyper_.matern_length},
                {"rbf_length", hyper_.rbf_length},
                {"noise", hyper_.noise},
                {"jitter", jitter_},
                {"log_marginal_likelihood", lml_},
                {"n_train", X_.rows()},
                {"n_inputs", X_.cols()},
                {"n_outputs", alpha_.cols()},
                {"x_train", std::vector<double>(X_.data(), X_.data() + X_.size())},
                {"alpha", std::vector<double>(alpha_.data(), alpha_.data() + alpha_.size())}};
    }

    static GaussianProcess from_json(const nlohmann::json& j) {
        GaussianProcess g;
        g.hyper_ = {j.at("amplitude").get<double>(), j.at("matern_length").get<double>(),
                    j.at("rbf_length").get<double>(), j.at("noise").get<double>()};
        g.jitter_ = j.at("jitter").get<double>();
        g.lml_ = j.at("log_marginal_likelihood").is_null() ? -std::numeric_limits<double>::infinity()
                                                           : j.at("log_marginal_likelihood").get<double>();
        const auto n = j.at("n_train").get<Eigen::Index>();
        const auto d = j.at("n_inputs").get<Eigen::Index>();
        const auto F = j.at("n_outputs").get<Eigen::Index>();
        const auto x = j.at("x_train").get<std::vector<double>>();
        const auto a = j.at("alpha").get<std::vector<double>>();
        if (n < 1 || d < 1 || F < 1 || x.size() != static_cast<std::size_t>(n * d) ||
            a.size() != static_cast<std::size_t>(n * F))
            throw ValidationError("gpr: inconsistent array sizes in artifact");
        g.X_ = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, d);
        g.alpha_ = Eigen::Map<const Eigen::MatrixXd>(a.data(), n, F);
        return g;
    }

private:
    Eigen::MatrixXd X_;
    Eigen::MatrixXd alpha_;
    GprHyper hyper_{};
    double jitter_ = 0.0;
    double lml_ = 0.0;
    int iterations_ = 0;
};

} // namespace stllab
