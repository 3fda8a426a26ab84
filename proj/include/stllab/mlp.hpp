#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/error.hpp"
#include "stllab/random.hpp"

namespace stllab {

struct MlpOptions {
    std::vector<int> hidden{32, 32, 32, 32, 32};
    int epochs = 1500;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double l2 = 1e-7; // on the kernels feeding sigmoid layers
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (hidden.empty()) throw ValidationError("nn: at least one hidden layer is required");
        for (int h : hidden)
            if (h < 1) throw ValidationError("nn: hidden layer widths must be >= 1");
        if (epochs < 0) throw ValidationError("nn: epochs must be >= 0");
        if (batch_size < 1) throw ValidationError("nn: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw ValidationError("nn: learning_rate must be > 0");
        if (!(l2 >= 0.0)) throw ValidationError("nn: l2 must be >= 0");
    }
};

/// Fully connected net: sigmoid hidden layers, linear output. Samples are rows
/// at the interface and columns internally.
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd W; // out x in
        Eigen::VectorXd b;
    };

    Mlp() = default;

    Mlp(int n_inputs, const std::vector<int>& hidden, int n_outputs) {
        int in = n_inputs;
        for (int h : hidden) {
            layers_.push_back({Eigen::MatrixXd::Zero(h, in), Eigen::VectorXd::Zero(h)});
            in = h;
        }
        layers_.push_back({Eigen::MatrixXd::Zero(n_outputs, in), Eigen::VectorXd::Zero(n_outputs)});
    }

    /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
    void init_glorot(Rng& rng) {
        for (auto& L : layers_) {
            const double lim = std::sqrt(6.0 / static_cast<double>(L.W.rows() + L.W.cols()));
            for (Eigen::Index c = 0; c < L.W.cols(); ++c)
                for (Eigen::Index r = 0; r < L.W.rows(); ++r) L.W(r, c) = rng.uniform(-lim, lim);
            L.b.setZero();
        }
    }

    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const {
        if (X.cols() != n_inputs())
            throw ValidationError("nn: expected " + std::to_string(n_inputs()) + " inputs, got " +
                                  std::to_string(X.cols()));
        Eigen::MatrixXd a = X.transpose();
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::MatrixXd z = layers_[l].W * a;
            z.colwise() += layers_[l].b;
            a = l + 1 < layers_.size() ? sigmoid(z) : z;
        }
        return a.transpose();
    }

    /// Mean squared error over the batch and outputs plus the L2 term; fills
    /// `grad` (same shapes as the layers) when non-null.
    double loss(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double l2, std::vector<Layer>* grad) const {
        const std::size_t L = layers_.size();
        std::vector<Eigen::MatrixXd> acts;
        acts.reserve(L + 1);
        acts.push_back(X.transpose());
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::MatrixXd z = layers_[l].W * acts.back();
            z.colwise() += layers_[l].b;
            acts.push_back(l + 1 < L ? sigmoid(z) : std::move(z));
        }
        const Eigen::MatrixXd diff = acts.back() - Y.transpose();
        const double count = static_cast<double>(diff.size());
        double value = diff.squaredNorm() / count;
        for (std::size_t l = 0; l + 1 < L; ++l) value += l2 * layers_[l].W.squaredNorm();
        if (!grad) return value;

        grad->resize(L);
        Eigen::MatrixXd delta = (2.0 / count) * diff;
        for (std::size_t l = L; l-- > 0;) {
            (*grad)[l].W = delta * acts[l].transpose();
            (*grad)[l].b = delta.rowwise().sum();
            if (l + 1 < L) (*grad)[l].W += 2.0 * l2 * layers_[l].W;
            if (l > 0) {
                const Eigen::MatrixXd& a = acts[l];
                delta = ((layers_[l].W.transpose() * delta).array() * a.array() * (1.0 - a.array())).matrix();
            }
        }
        return value;
    }

    /// Mini-batch Adam; returns the per-epoch mean training loss.
    std::vector<double> fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const MlpOptions& opt,
                            std::uint64_t seed) {
        opt.validate();
        if (X.rows() != Y.rows()) throw ValidationError("nn: X and Y row counts differ");
        if (X.cols() != n_inputs() || Y.cols() != n_outputs()) throw ValidationError("nn: data shape mismatch");
        const auto N = static_cast<std::size_t>(X.rows());
        Rng shuffle_rng(derive_seed(seed, 1));
        std::vector<Layer> m1 = zeros_like(), m2 = zeros_like(), g;
        std::vector<double> history;
        history.reserve(static_cast<std::size_t>(opt.epochs));
        const auto B = static_cast<std::size_t>(opt.batch_size);
        Eigen::MatrixXd xb, yb;
        double b1t = 1.0, b2t = 1.0;
        for (int epoch = 0; epoch < opt.epochs; ++epoch) {
            const auto perm = shuffle_rng.permutation(N);
            double total = 0.0;
            for (std::size_t start = 0; start < N; start += B) {
                const std::size_t n = std::min(B, N - start);
                xb.resize(static_cast<Eigen::Index>(n), X.cols());
                yb.resize(static_cast<Eigen::Index>(n), Y.cols());
                for (std::size_t k = 0; k < n; ++k) {
                    xb.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(perm[start + k]));
                    yb.row(static_cast<Eigen::Index>(k)) = Y.row(static_cast<Eigen::Index>(perm[start + k]));
                }
                const double value = loss(xb, yb, opt.l2, &g);
                if (!std::isfinite(value))
                    throw NumericError("nn: training loss became non-finite at epoch " + std::to_string(epoch + 1));
                total += value * static_cast<double>(n);
                b1t *= opt.beta1;
                b2t *= opt.beta2;
                const double step = opt.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
                for (std::size_t l = 0; l < layers_.size(); ++l) {
                    adam(layers_[l].W, m1[l].W, m2[l].W, g[l].W, opt, step);
                    adam(layers_[l].b, m1[l].b, m2[l].b, g[l].b, opt, step);
                }
            }
            history.push_back(total / static_cast<double>(N));
        }
        return history;
    }

    Eigen::Index n_inputs() const { return layers_.empty() ? 0 : layers_.front().W.cols(); }
    Eigen::Index n_outputs() const { return layers_.empty() ? 0 : layers_.back().W.rows(); }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& L : layers_)
            arr.push_back({{"rows", L.W.rows()},
                           {"cols", L.W.cols()},
                           {"W", std::vector<double>(L.W.data(), L.W.data() + L.W.size())},
                           {"b", std::vector<double>(L.b.data(), L.b.data() + L.b.size())}});
        return {{"layers", std::move(arr)}};
    }

    static Mlp from_json(const nlohmann::json& j) {
        Mlp net;
        Eigen::Index prev = -1;
        for (const auto& lj : j.at("layers")) {
            const auto r = lj.at("rows").get<Eigen::Index>();
            const auto c = lj.at("cols").get<Eigen::Index>();
            const auto w = lj.at("W").get<std::vector<double>>();
            const auto b = lj.at("b").get<std::vector<double>>();
            if (r < 1 || c < 1 || w.size() != static_cast<std::size_t>(r * c) || b.size() != static_cast<std::size_t>(r) ||
                (prev >= 0 && c != prev))
                throw ValidationError("nn: inconsistent layer shapes in artifact");
            net.layers_.push_back({Eigen::Map<const Eigen::MatrixXd>(w.data(), r, c),
                                   Eigen::Map<const Eigen::VectorXd>(b.data(), r)});
            prev = r;
        }
        if (net.layers_.size() < 2) throw ValidationError("nn: artifact needs at least one hidden layer");
        return net;
    }

private:
    static Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

    std::vector<Layer> zeros_like() const {
        std::vector<Layer> out;
        for (const auto& L : layers_)
            out.push_back({Eigen::MatrixXd::Zero(L.W.rows(), L.W.cols()), Eigen::VectorXd::Zero(L.b.size())});
        return out;
    }

    template <class M>
    static void adam(M& p, M& m, M& v, const M& g, const MlpOptions& o, double step) {
        m = o.beta1 * m + (1.0 - o.beta1) * g;
        v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
        p.array() -= step * m.array() / (v.array().sqrt() + o.epsilon);
    }

    std::vector<Layer> layers_;
};

} // namespace stllab
