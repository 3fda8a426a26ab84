#pragma once

#include <numeric>
#include <vector>

#include "stllab/cart.hpp"
#include "stllab/parallel.hpp"

namespace stllab {

struct BoostingOptions {
    int n_stages = 125;
    int max_depth = 10; // < 0: unlimited
    double learning_rate = 0.05;
};

/// Squared-loss gradient boosting, one independent ensemble per output column.
class GradientBoosting {
public:
    void fit(const Eigen::MatrixXd& X, const RowMatrix& Y, const BoostingOptions& opt, int threads = 1) {
        if (opt.n_stages < 0) throw ValidationError("gbt: n_stages must be >= 0");
        if (!(opt.learning_rate >= 0.0)) throw ValidationError("gbt: learning_rate must be >= 0");
        if (X.rows() < 1) throw ValidationError("gbt: no training rows");
        const Eigen::Index N = X.rows();
        const auto F = static_cast<std::size_t>(Y.cols());
        n_features_ = X.cols();
        learning_rate_ = opt.learning_rate;
        init_.assign(F, 0.0);
        trees_.assign(F, {});
        train_mse_.assign(F, {});

        std::vector<int> all(static_cast<std::size_t>(N));
        std::iota(all.begin(), all.end(), 0);
        const RowMatrix dummy(N, 1);
        const Presort sorted(TreeData(X, dummy), all);
        const TreeOptions topt{opt.max_depth, 1};

        parallel_for(F, threads, [&](std::size_t j) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < N; ++i) sum += Y(i, static_cast<Eigen::Index>(j));
            init_[j] = sum / static_cast<double>(N);
            Eigen::VectorXd fitted = Eigen::VectorXd::Constant(N, init_[j]);
            RowMatrix residual(N, 1);
            auto mse = [&] {
                double s = 0.0;
                for (Eigen::Index i = 0; i < N; ++i) {
                    const double e = Y(i, static_cast<Eigen::Index>(j)) - fitted(i);
                    s += e * e;
                }
                return s / static_cast<double>(N);
            };
            train_mse_[j].push_back(mse());
            for (int t = 0; t < opt.n_stages; ++t) {
                for (Eigen::Index i = 0; i < N; ++i) residual(i, 0) = Y(i, static_cast<Eigen::Index>(j)) - fitted(i);
                RegressionTree tree;
                tree.fit(TreeData(X, residual), sorted, topt);
                for (Eigen::Index i = 0; i < N; ++i) {
                    auto row = [&](int f) { return X(i, f); };
                    fitted(i) += learning_rate_ * tree.predict(row)[0];
                }
                trees_[j].push_back(std::move(tree));
                train_mse_[j].push_back(mse());
            }
        });
    }

    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const {
        if (X.cols() != n_features_)
            throw ValidationError("gbt: expected " + std::to_string(n_features_) + " features, got " +
                                  std::to_string(X.cols()));
        Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(init_.size()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            auto row = [&](int f) { return X(i, f); };
            for (std::size_t j = 0; j < init_.size(); ++j) {
                double v = init_[j];
                for (const auto& t : trees_[j]) v += learning_rate_ * t.predict(row)[0];
                out(i, static_cast<Eigen::Index>(j)) = v;
            }
        }
        return out;
    }

    /// Training MSE per output after each stage (index 0 is the mean predictor).
    const std::vector<std::vector<double>>& training_mse() const { return train_mse_; }
    Eigen::Index n_outputs() const { return static_cast<Eigen::Index>(init_.size()); }

    nlohmann::json to_json() const {
        nlohmann::json outputs = nlohmann::json::array();
        for (std::size_t j = 0; j < init_.size(); ++j) {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : trees_[j]) trees.push_back(t.to_json(false));
            outputs.push_back({{"init", init_[j]}, {"trees", std::move(trees)}});
        }
        return {{"n_features", n_features_}, {"learning_rate", learning_rate_}, {"outputs", std::move(outputs)}};
    }

    static GradientBoosting from_json(const nlohmann::json& j) {
        GradientBoosting g;
        g.n_features_ = j.at("n_features").get<Eigen::Index>();
        g.learning_rate_ = j.at("learning_rate").get<double>();
        for (const auto& oj : j.at("outputs")) {
            g.init_.push_back(oj.at("init").get<double>());
            g.trees_.emplace_back();
            for (const auto& tj : oj.at("trees")) g.trees_.back().push_back(RegressionTree::from_json(tj));
        }
        if (g.init_.empty()) throw ValidationError("gbt: artifact holds no outputs");
        return g;
    }

private:
    std::vector<double> init_;
    std::vector<std::vector<RegressionTree>> trees_;
    std::vector<std::vector<double>> train_mse_;
    double learning_rate_ = 0.05;
    Eigen::Index n_features_ = 0;
};

} // namespace stllab
