#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "stllab/cart.hpp"
#include "stllab/parallel.hpp"
#include "stllab/random.hpp"

namespace stllab {

struct ForestOptions {
    int n_trees = 200;
    bool bootstrap = true;
    TreeOptions tree{};
    bool keep_members = true; // needed for persistence only
};

/// Feature importances normalized to sum 1. `degenerate` is set when no tree
/// split at all; the vector is then uniform.
struct Importances {
    std::vector<double> values;
    bool degenerate = false;
};

/// Bagged CART ensemble over all outputs jointly; prediction is the tree mean.
class RandomForest {
public:
    void fit(const Eigen::MatrixXd& X, const RowMatrix& Y, std::uint64_t seed, const ForestOptions& opt,
             int threads = 1) {
        if (opt.n_trees < 1) throw ValidationError("rf: n_trees must be >= 1");
        if (X.rows() < 1) throw ValidationError("rf: no training rows");
        targets_ = Y;
        n_features_ = X.cols();
        const TreeData data(X, targets_);
        const auto N = static_cast<int>(X.rows());
        trees_.assign(static_cast<std::size_t>(opt.n_trees), RegressionTree{});
        parallel_for(trees_.size(), threads, [&](std::size_t t) {
            std::vector<int> samples(static_cast<std::size_t>(N));
            if (opt.bootstrap) {
                Rng rng(derive_seed(seed, t));
                for (auto& s : samples) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
            } else {
                std::iota(samples.begin(), samples.end(), 0);
            }
            trees_[t].fit(data, Presort(data, samples), opt.tree, opt.keep_members);
        });
    }

    Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const {
        if (X.cols() != n_features_)
            throw ValidationError("rf: expected " + std::to_string(n_features_) + " features, got " +
                                  std::to_string(X.cols()));
        const Eigen::Index F = targets_.cols();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), F);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            auto row = [&](int f) { return X(i, f); };
            for (const auto& t : trees_) {
                const double* v = t.predict(row);
                for (Eigen::Index j = 0; j < F; ++j) out(i, j) += v[j];
            }
        }
        out /= static_cast<double>(trees_.size());
        return out;
    }

    /// Mean decrease in impurity, averaged over trees and normalized.
    Importances importances() const {
        Importances imp;
        imp.values.assign(static_cast<std::size_t>(n_features_), 0.0);
        for (const auto& t : trees_)
            for (std::size_t f = 0; f < imp.values.size(); ++f) imp.values[f] += t.importance()[f];
        double total = 0.0;
        for (double& v : imp.values) {
            v /= static_cast<double>(trees_.size());
            total += v;
        }
        if (!(total > 0.0)) {
            imp.degenerate = true;
            imp.values.assign(imp.values.size(), 1.0 / static_cast<double>(imp.values.size()));
            return imp;
        }
        for (double& v : imp.values) v /= total;
        return imp;
    }

    std::size_t n_trees() const { return trees_.size(); }
    const RegressionTree& tree(std::size_t i) const { return trees_[i]; }
    Eigen::Index n_features() const { return n_features_; }
    Eigen::Index n_outputs() const { return targets_.cols(); }

    nlohmann::json to_json() const {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : trees_) trees.push_back(t.to_json(true));
        return {{"n_features", n_features_},
                {"n_outputs", targets_.cols()},
                {"targets", std::vector<double>(targets_.data(), targets_.data() + targets_.size())},
                {"trees", std::move(trees)}};
    }

    static RandomForest from_json(const nlohmann::json& j) {
        RandomForest rf;
        rf.n_features_ = j.at("n_features").get<Eigen::Index>();
        const auto F = j.at("n_outputs").get<Eigen::Index>();
        const auto flat = j.at("targets").get<std::vector<double>>();
        if (F < 1 || flat.size() % static_cast<std::size_t>(F) != 0)
            throw ValidationError("rf: stored targets do not match n_outputs");
        rf.targets_ = Eigen::Map<const RowMatrix>(flat.data(), static_cast<Eigen::Index>(flat.size()) / F, F);
        for (const auto& tj : j.at("trees")) rf.trees_.push_back(RegressionTree::from_json(tj, &rf.targets_));
        if (rf.trees_.empty()) throw ValidationError("rf: artifact holds no trees");
        return rf;
    }

private:
    std::vector<RegressionTree> trees_;
    RowMatrix targets_;
    Eigen::Index n_features_ = 0;
};

} // namespace stllab
