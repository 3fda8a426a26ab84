#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/error.hpp"

namespace stllab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TreeOptions {
    int max_depth = -1; // < 0: unlimited
    int min_samples_leaf = 1;
};

/// Borrowed training data: features column-major (N x d), targets row-major (N x F).
struct TreeData {
    const double* x = nullptr;
    Eigen::Index n_rows = 0;
    Eigen::Index n_features = 0;
    const double* y = nullptr;
    Eigen::Index n_outputs = 0;

    TreeData(const Eigen::MatrixXd& X, const RowMatrix& Y)
        : x(X.data()), n_rows(X.rows()), n_features(X.cols()), y(Y.data()), n_outputs(Y.cols()) {
        if (X.rows() != Y.rows()) throw ValidationError("tree: X and Y row counts differ");
    }

    double feature(int row, Eigen::Index f) const { return x[f * n_rows + row]; }
    const double* target(int row) const { return y + static_cast<Eigen::Index>(row) * n_outputs; }
};

/// Sample rows (with repeats for bootstrap draws) ordered by each feature; ties
/// keep ascending row order. Fitting consumes a copy.
struct Presort {
    std::vector<std::vector<int>> order;

    Presort() = default;
    Presort(const TreeData& data, const std::vector<int>& samples) {
        order.resize(static_cast<std::size_t>(data.n_features));
        for (Eigen::Index f = 0; f < data.n_features; ++f) {
            auto& o = order[static_cast<std::size_t>(f)];
            o = samples;
            std::sort(o.begin(), o.end(), [&](int r1, int r2) {
                const double v1 = data.feature(r1, f);
                const double v2 = data.feature(r2, f);
                return v1 < v2 || (v1 == v2 && r1 < r2);
            });
        }
    }
};

/// CART regression tree. Splits maximize the decrease of the output-averaged
/// squared error; ties go to the lowest feature index, then the lowest threshold.
class RegressionTree {
public:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf = -1; // index into leaf storage, -1 for internal nodes
    };

    void fit(const TreeData& data, Presort sorted, const TreeOptions& opt, bool keep_members = false) {
        nodes_.clear();
        leaf_values_.clear();
        member_offsets_.assign(1, 0);
        members_.clear();
        n_outputs_ = data.n_outputs;
        importance_.assign(static_cast<std::size_t>(data.n_features), 0.0);
        n_splits_ = 0;
        if (sorted.order.empty() || sorted.order[0].empty()) throw ValidationError("tree: no training samples");

        const auto F = static_cast<std::size_t>(data.n_outputs);
        const std::size_t S = sorted.order[0].size();
        const double norm = static_cast<double>(S) * static_cast<double>(F);
        std::vector<char> goes_left(static_cast<std::size_t>(data.n_rows), 0);
        std::vector<int> buffer(S);
        std::vector<double> total(F), left(F);

        struct Work {
            int node;
            std::size_t begin, end;
            int depth;
        };
        std::vector<Work> stack{{0, 0, S, 0}};
        nodes_.emplace_back();
        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();
            const std::size_t n = w.end - w.begin;
            const int* rows0 = sorted.order[0].data() + w.begin;

            std::fill(total.begin(), total.end(), 0.0);
            bool pure = true;
            const double* first = data.target(rows0[0]);
            for (std::size_t k = 0; k < n; ++k) {
                const double* yr = data.target(rows0[k]);
                for (std::size_t j = 0; j < F; ++j) {
                    total[j] += yr[j];
                    pure = pure && yr[j] == first[j];
                }
            }
            double baseline = 0.0;
            for (std::size_t j = 0; j < F; ++j) baseline += total[j] * total[j] / static_cast<double>(n);

            const auto min_leaf = static_cast<std::size_t>(std::max(1, opt.min_samples_leaf));
            const bool depth_ok = opt.max_depth < 0 || w.depth < opt.max_depth;
            int best_feature = -1;
            double best_score = baseline;
            double best_threshold = 0.0;
            std::size_t best_left = 0;
            if (!pure && depth_ok && n >= 2 * min_leaf) {
                for (Eigen::Index f = 0; f < data.n_features; ++f) {
                    const int* ord = sorted.order[static_cast<std::size_t>(f)].data() + w.begin;
                    std::fill(left.begin(), left.end(), 0.0);
                    for (std::size_t k = 0; k + 1 < n; ++k) {
                        const double* yr = data.target(ord[k]);
                        for (std::size_t j = 0; j < F; ++j) left[j] += yr[j];
                        const std::size_t nl = k + 1;
                        const std::size_t nr = n - nl;
                        if (nl < min_leaf) continue;
                        if (nr < min_leaf) break;
                        const double xv = data.feature(ord[k], f);
                        const double xn = data.feature(ord[k + 1], f);
                        if (!(xn > xv)) continue;
                        double sl = 0.0, sr = 0.0;
                        for (std::size_t j = 0; j < F; ++j) {
                            const double r = total[j] - left[j];
                            sl += left[j] * left[j];
                            sr += r * r;
                        }
                        const double score = sl / static_cast<double>(nl) + sr / static_cast<double>(nr);
                        if (score > best_score) {
                            best_score = score;
                            best_feature = static_cast<int>(f);
                            double thr = xv + 0.5 * (xn - xv);
                            if (!(thr < xn)) thr = xv;
                            best_threshold = thr;
                            best_left = nl;
                        }
                    }
                }
            }

            if (best_feature < 0) {
                make_leaf(w.node, data, rows0, n, keep_members);
                continue;
            }

            importance_[static_cast<std::size_t>(best_feature)] += (best_score - baseline) / norm;
            ++n_splits_;
            const int* split_ord = sorted.order[static_cast<std::size_t>(best_feature)].data() + w.begin;
            for (std::size_t k = 0; k < n; ++k) goes_left[static_cast<std::size_t>(split_ord[k])] = k < best_left;
            for (auto& o : sorted.order) {
                std::size_t li = w.begin, ri = 0;
                for (std::size_t k = w.begin; k < w.end; ++k) {
                    const int r = o[k];
                    if (goes_left[static_cast<std::size_t>(r)])
                        o[li++] = r;
                    else
                        buffer[ri++] = r;
                }
                std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(ri),
                          o.begin() + static_cast<std::ptrdiff_t>(li));
            }
            const int l = static_cast<int>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            Node& nd = nodes_[static_cast<std::size_t>(w.node)];
            nd.feature = best_feature;
            nd.threshold = best_threshold;
            nd.left = l;
            nd.right = l + 1;
            stack.push_back({l + 1, w.begin + best_left, w.end, w.depth + 1});
            stack.push_back({l, w.begin, w.begin + best_left, w.depth + 1});
        }
    }

    /// Leaf reached by a feature row accessed as x(f).
    template <class Row>
    int find_leaf(const Row& x) const {
        int i = 0;
        for (;;) {
            const Node& nd = nodes_[static_cast<std::size_t>(i)];
            if (nd.leaf >= 0) return nd.leaf;
            i = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
    }

    const double* leaf_value(int leaf) const {
        return leaf_values_.data() + static_cast<std::size_t>(leaf) * static_cast<std::size_t>(n_outputs_);
    }

    template <class Row>
    const double* predict(const Row& x) const {
        return leaf_value(find_leaf(x));
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<double>& importance() const { return importance_; }
    int n_splits() const { return n_splits_; }
    int n_leaves() const { return static_cast<int>(leaf_values_.size() / static_cast<std::size_t>(n_outputs_)); }
    Eigen::Index n_outputs() const { return n_outputs_; }

    // ---- persistence --------------------------------------------------------
    // With members kept, leaf values are rebuilt from the training targets on
    // load using the same summation order, so predictions stay bit-exact.

    nlohmann::json to_json(bool members_only) const {
        std::vector<int> feature, left, right, leaf;
        std::vector<double> threshold;
        for (const Node& nd : nodes_) {
            feature.push_back(nd.feature);
            threshold.push_back(nd.threshold);
            left.push_back(nd.left);
            right.push_back(nd.right);
            leaf.push_back(nd.leaf);
        }
        nlohmann::json j{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                         {"leaf", leaf},       {"n_outputs", n_outputs_}, {"importance", importance_},
                         {"n_splits", n_splits_}};
        if (members_only) {
            if (member_offsets_.size() < 2 && !nodes_.empty()) throw ValidationError("tree: leaf members not kept");
            j["member_offsets"] = member_offsets_;
            j["members"] = members_;
        } else {
            j["leaf_values"] = leaf_values_;
        }
        return j;
    }

    static RegressionTree from_json(const nlohmann::json& j, const RowMatrix* targets = nullptr) {
        RegressionTree t;
        const auto feature = j.at("feature").get<std::vector<int>>();
        const auto threshold = j.at("threshold").get<std::vector<double>>();
        const auto left = j.at("left").get<std::vector<int>>();
        const auto right = j.at("right").get<std::vector<int>>();
        const auto leaf = j.at("leaf").get<std::vector<int>>();
        const std::size_t n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || leaf.size() != n)
            throw ValidationError("tree: node arrays have inconsistent lengths");
        t.n_outputs_ = j.at("n_outputs").get<Eigen::Index>();
        t.importance_ = j.at("importance").get<std::vector<double>>();
        t.n_splits_ = j.at("n_splits").get<int>();
        int n_leaves = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t.nodes_.push_back({feature[i], threshold[i], left[i], right[i], leaf[i]});
            if (leaf[i] >= 0) {
                ++n_leaves;
            } else if (left[i] <= 0 || right[i] <= 0 || static_cast<std::size_t>(left[i]) >= n ||
                       static_cast<std::size_t>(right[i]) >= n) {
                throw ValidationError("tree: child index out of range");
            }
        }
        if (j.contains("leaf_values")) {
            t.leaf_values_ = j.at("leaf_values").get<std::vector<double>>();
        } else {
            if (!targets) throw ValidationError("tree: member-encoded leaves need the training targets");
            t.member_offsets_ = j.at("member_offsets").get<std::vector<std::size_t>>();
            t.members_ = j.at("members").get<std::vector<int>>();
            if (t.member_offsets_.size() != static_cast<std::size_t>(n_leaves) + 1)
                throw ValidationError("tree: member offsets do not match the leaf count");
            t.leaf_values_.assign(static_cast<std::size_t>(n_leaves) * static_cast<std::size_t>(t.n_outputs_), 0.0);
            for (int l = 0; l < n_leaves; ++l) {
                const auto lo = t.member_offsets_[static_cast<std::size_t>(l)];
                const auto hi = t.member_offsets_[static_cast<std::size_t>(l) + 1];
                for (std::size_t k = lo; k < hi; ++k)
                    if (t.members_[k] < 0 || t.members_[k] >= targets->rows())
                        throw ValidationError("tree: leaf member out of range");
                t.leaf_mean(*targets, t.members_.data() + lo, hi - lo,
                            t.leaf_values_.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(t.n_outputs_));
            }
        }
        if (t.leaf_values_.size() != static_cast<std::size_t>(n_leaves) * static_cast<std::size_t>(t.n_outputs_))
            throw ValidationError("tree: leaf value count mismatch");
        return t;
    }

private:
    void leaf_mean(const RowMatrix& Y, const int* rows, std::size_t n, double* out) const {
        for (Eigen::Index j = 0; j < n_outputs_; ++j) out[j] = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < n_outputs_; ++j) out[j] += Y(rows[k], j);
        for (Eigen::Index j = 0; j < n_outputs_; ++j) out[j] /= static_cast<double>(n);
    }

    void make_leaf(int node, const TreeData& data, const int* rows, std::size_t n, bool keep_members) {
        const int id = n_leaves();
        nodes_[static_cast<std::size_t>(node)].leaf = id;
        const auto F = static_cast<std::size_t>(n_outputs_);
        leaf_values_.resize(leaf_values_.size() + F, 0.0);
        double* out = leaf_values_.data() + static_cast<std::size_t>(id) * F;
        for (std::size_t k = 0; k < n; ++k) {
            const double* yr = data.target(rows[k]);
            for (std::size_t j = 0; j < F; ++j) out[j] += yr[j];
        }
        for (std::size_t j = 0; j < F; ++j) out[j] /= static_cast<double>(n);
        if (keep_members) {
            members_.insert(members_.end(), rows, rows + n);
            member_offsets_.push_back(members_.size());
        }
    }

    std::vector<Node> nodes_;
    std::vector<double> leaf_values_;
    std::vector<std::size_t> member_offsets_{0};
    std::vector<int> members_;
    std::vector<double> importance_;
    Eigen::Index n_outputs_ = 1;
    int n_splits_ = 0;
};

} // namespace stllab
