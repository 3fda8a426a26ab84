#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/surrogate.hpp"

namespace stllab {

/// Errors in dB over N designs x F frequencies.
struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    double mme = 0.0; // mean over designs of the worst-frequency error
};

inline Metrics metrics(const Eigen::MatrixXd& Y_true, const Eigen::MatrixXd& Y_pred) {
    if (Y_true.rows() != Y_pred.rows() || Y_true.cols() != Y_pred.cols())
        throw ValidationError("metrics: shapes differ (" + std::to_string(Y_true.rows()) + "x" +
                              std::to_string(Y_true.cols()) + " vs " + std::to_string(Y_pred.rows()) + "x" +
                              std::to_string(Y_pred.cols()) + ")");
    if (Y_true.size() == 0) throw ValidationError("metrics: empty input");
    const Eigen::ArrayXXd e = (Y_pred - Y_true).array().abs();
    Metrics m;
    m.rmse = std::sqrt(e.square().mean());
    m.mae = e.mean();
    m.mme = e.rowwise().maxCoeff().mean();
    return m;
}

/// Seeded shuffle split into k folds; the first N mod k folds hold one extra row.
inline std::vector<std::vector<Eigen::Index>> kfold_indices(Eigen::Index n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation: k must be >= 2");
    if (n < k)
        throw ValidationError("cross-validation: " + std::to_string(n) + " rows cannot fill " + std::to_string(k) +
                              " folds");
    Rng rng(seed);
    const auto perm = rng.permutation(static_cast<std::size_t>(n));
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const auto size = static_cast<std::size_t>(n / k + (f < n % k ? 1 : 0));
        for (std::size_t i = 0; i < size; ++i) folds[static_cast<std::size_t>(f)].push_back(static_cast<Eigen::Index>(perm[pos++]));
    }
    return folds;
}

struct Summary {
    double mean = 0.0;
    double std = 0.0; // population deviation over folds
};

inline Summary summarize(const std::vector<double>& v) {
    Summary s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size()));
    return s;
}

struct MetricsReport {
    std::string model;
    std::string family;
    std::string recipe;
    Eigen::Index n = 0;
    int folds = 0;
    Summary rmse, mae, mme;
    double train_s = 0.0; // summed over folds
    std::vector<Metrics> per_fold;
    std::string status = "ok"; // ok | skipped | failed
    std::string message;

    nlohmann::json to_json(bool with_timing = true) const {
        nlohmann::json fold_arr = nlohmann::json::array();
        for (const auto& m : per_fold) fold_arr.push_back({{"rmse", m.rmse}, {"mae", m.mae}, {"mme", m.mme}});
        nlohmann::json j{{"model", model},         {"family", family},       {"recipe", recipe},
                         {"n", n},                 {"folds", folds},         {"status", status},
                         {"message", message},     {"rmse_mean", rmse.mean}, {"rmse_std", rmse.std},
                         {"mae_mean", mae.mean},   {"mae_std", mae.std},     {"mme_mean", mme.mean},
                         {"mme_std", mme.std},     {"per_fold", fold_arr}};
        j["train_s"] = with_timing ? nlohmann::json(train_s) : nlohmann::json(nullptr);
        return j;
    }
};

/// Fits on the first matrix pair and predicts the third matrix.
using Regressor =
    std::function<FitPredict(const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& X_test)>;

inline MetricsReport cross_validate(const Dataset& ds, const Regressor& reg, int k, std::uint64_t seed) {
    const auto folds = kfold_indices(ds.rows(), k, seed);
    MetricsReport r;
    r.n = ds.rows();
    r.folds = k;
    std::vector<double> rmse, mae, mme;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<Eigen::Index> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        const Dataset train = ds.select(train_idx);
        const Dataset test = ds.select(folds[f]);
        const FitPredict fp = reg(train.X, train.Y, test.X);
        const Metrics m = metrics(test.Y, fp.Y_hat);
        r.per_fold.push_back(m);
        rmse.push_back(m.rmse);
        mae.push_back(m.mae);
        mme.push_back(m.mme);
        r.train_s += fp.train_seconds;
    }
    r.rmse = summarize(rmse);
    r.mae = summarize(mae);
    r.mme = summarize(mme);
    return r;
}

inline MetricsReport kfold_cv(const Dataset& ds, const RegressorSpec& spec, Recipe recipe, int k, std::uint64_t seed,
                              int threads = 1) {
    ds.validate();
    MetricsReport r = cross_validate(
        ds,
        [&](const Eigen::MatrixXd& Xtr, const Eigen::MatrixXd& Ytr, const Eigen::MatrixXd& Xte) {
            return fit_predict(spec, recipe, Xtr, Ytr, Xte, threads);
        },
        k, seed);
    r.model = ds.meta.model + (ds.meta.banded ? "_banded" : "");
    r.family = to_string(spec.family);
    r.recipe = to_string(recipe);
    return r;
}

/// Single seeded train/test split; `test_fraction` of the rows are held out.
inline MetricsReport holdout(const Dataset& ds, const RegressorSpec& spec, Recipe recipe, double test_fraction,
                             std::uint64_t seed, int threads = 1) {
    ds.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("holdout: test fraction must lie in (0, 1)");
    const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(ds.rows())));
    if (n_test < 1 || n_test >= ds.rows() - 1) throw ValidationError("holdout: split leaves an empty side");
    Rng rng(seed);
    const auto perm = rng.permutation(static_cast<std::size_t>(ds.rows()));
    std::vector<Eigen::Index> test_idx, train_idx;
    for (std::size_t i = 0; i < perm.size(); ++i)
        (static_cast<Eigen::Index>(i) < n_test ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(perm[i]));
    const Dataset train = ds.select(train_idx);
    const Dataset test = ds.select(test_idx);
    const FitPredict fp = fit_predict(spec, recipe, train.X, train.Y, test.X, threads);
    const Metrics m = metrics(test.Y, fp.Y_hat);
    MetricsReport r;
    r.model = ds.meta.model + (ds.meta.banded ? "_banded" : "");
    r.family = to_string(spec.family);
    r.recipe = to_string(recipe);
    r.n = ds.rows();
    r.folds = 1;
    r.per_fold = {m};
    r.rmse = {m.rmse, 0.0};
    r.mae = {m.mae, 0.0};
    r.mme = {m.mme, 0.0};
    r.train_s = fp.train_seconds;
    return r;
}

struct BenchmarkOptions {
    std::vector<Family> families{Family::nn, Family::gpr, Family::rf, Family::gbt};
    std::vector<Recipe> recipes{Recipe::base, Recipe::physics, Recipe::physics_r};
    std::vector<Eigen::Index> sizes; // empty: full dataset only
    int folds = 5;
    double holdout_fraction = 0.0;   // > 0 replaces k-fold CV by one holdout split
    std::uint64_t seed = 0;
    int threads = 1;
    std::function<void(RegressorSpec&)> adjust; // optional hyperparameter override
};

struct BenchmarkReport {
    std::vector<MetricsReport> cells;
    bool with_timing = true;

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : cells) arr.push_back(c.to_json(with_timing));
        return {{"cells", std::move(arr)}};
    }

    std::string to_csv() const {
        std::string out = "model,family,recipe,n,rmse_mean,rmse_std,mae_mean,mae_std,mme_mean,mme_std,train_s\n";
        for (const auto& c : cells) {
            if (c.status != "ok") continue;
            out += c.model + "," + c.family + "," + c.recipe + "," + std::to_string(c.n);
            for (double v : {c.rmse.mean, c.rmse.std, c.mae.mean, c.mae.std, c.mme.mean, c.mme.std})
                out += "," + format_double(v);
            out += "," + (with_timing ? format_double(c.train_s) : std::string()) + "\n";
        }
        return out;
    }
};

/// Cross product of datasets x families x recipes x sizes. Subsets are the
/// first n rows. Every cell uses the same master seed, so cells do not depend
/// on which others run; failures are recorded and the run continues.
inline BenchmarkReport benchmark(const std::vector<Dataset>& datasets, const BenchmarkOptions& opt) {
    BenchmarkReport rep;
    for (const Dataset& full : datasets) {
        full.validate();
        const std::string label = full.meta.model + (full.meta.banded ? "_banded" : "");
        const std::vector<Eigen::Index> sizes = opt.sizes.empty() ? std::vector<Eigen::Index>{full.rows()} : opt.sizes;
        for (Family fam : opt.families) {
            for (Recipe rec : opt.recipes) {
                for (Eigen::Index n : sizes) {
                    MetricsReport cell;
                    cell.model = label;
                    cell.family = to_string(fam);
                    cell.recipe = to_string(rec);
                    cell.n = n;
                    cell.folds = opt.holdout_fraction > 0.0 ? 1 : opt.folds;
                    if (n > full.rows() || n < 2) {
                        cell.status = "skipped";
                        cell.message = "size " + std::to_string(n) + " outside dataset of " +
                                       std::to_string(full.rows()) + " rows";
                        rep.cells.push_back(cell);
                        continue;
                    }
                    RegressorSpec spec = RegressorSpec::defaults(fam, full.meta.model, opt.seed);
                    if (opt.adjust) opt.adjust(spec);
                    try {
                        const Dataset ds = full.head(n);
                        MetricsReport r = opt.holdout_fraction > 0.0
                                              ? holdout(ds, spec, rec, opt.holdout_fraction, opt.seed, opt.threads)
                                              : kfold_cv(ds, spec, rec, opt.folds, opt.seed, opt.threads);
                        r.model = label;
                        rep.cells.push_back(std::move(r));
                    } catch (const std::exception& e) {
                        cell.status = "failed";
                        cell.message = e.what();
                        rep.cells.push_back(cell);
                    }
                }
            }
        }
    }
    return rep;
}

} // namespace stllab
