#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/boosting.hpp"
#include "stllab/dataset.hpp"
#include "stllab/forest.hpp"
#include "stllab/gpr.hpp"
#include "stllab/mlp.hpp"
#include "stllab/preprocess.hpp"

namespace stllab {

inline constexpr int kModelFormatVersion = 1;

enum class Family { nn, gpr, rf, gbt };

inline std::string to_string(Family f) {
    switch (f) {
    case Family::nn: return "nn";
    case Family::gpr: return "gpr";
    case Family::rf: return "rf";
    case Family::gbt: return "gbt";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "nn") return Family::nn;
    if (s == "gpr") return Family::gpr;
    if (s == "rf") return Family::rf;
    if (s == "gbt") return Family::gbt;
    throw ValidationError("unknown regressor family '" + s + "' (expected nn, gpr, rf or gbt)");
}

/// Family plus its hyperparameters. Only the block matching `family` is used.
struct RegressorSpec {
    Family family = Family::rf;
    std::uint64_t seed = 0;
    MlpOptions nn{};
    GprOptions gpr{};
    ForestOptions rf{};
    bool rf_per_output = false; // one single-output forest per output column
    BoostingOptions gbt{};

    /// Defaults for a dataset produced by `model`; the modal datasets train the
    /// net for longer.
    static RegressorSpec defaults(Family family, const std::string& dataset_model = "", std::uint64_t seed = 0) {
        RegressorSpec s;
        s.family = family;
        s.seed = seed;
        if (dataset_model == "modal") s.nn.epochs = 2500;
        return s;
    }

    void validate() const {
        switch (family) {
        case Family::nn: nn.validate(); break;
        case Family::gpr:
            if (gpr.restarts < 0) throw ValidationError("gpr: restarts must be >= 0");
            if (!(gpr.lower > 0.0 && gpr.lower < gpr.upper)) throw ValidationError("gpr: invalid hyperparameter bounds");
            if (gpr.lbfgs.max_iterations < 0) throw ValidationError("gpr: max_iterations must be >= 0");
            break;
        case Family::rf:
            if (rf.n_trees < 1) throw ValidationError("rf: n_trees must be >= 1");
            if (rf.tree.min_samples_leaf < 1) throw ValidationError("rf: min_samples_leaf must be >= 1");
            break;
        case Family::gbt:
            if (gbt.n_stages < 0) throw ValidationError("gbt: n_stages must be >= 0");
            if (!(gbt.learning_rate >= 0.0)) throw ValidationError("gbt: learning_rate must be >= 0");
            break;
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"family", to_string(family)}, {"seed", seed}};
        switch (family) {
        case Family::nn:
            j["hyperparameters"] = {{"hidden", nn.hidden},       {"epochs", nn.epochs}, {"batch_size", nn.batch_size},
                                    {"learning_rate", nn.learning_rate}, {"l2", nn.l2},    {"beta1", nn.beta1},
                                    {"beta2", nn.beta2},         {"epsilon", nn.epsilon}};
            break;
        case Family::gpr:
            j["hyperparameters"] = {{"init",
                                     {gpr.init.amplitude, gpr.init.matern_length, gpr.init.rbf_length, gpr.init.noise}},
                                    {"optimize", gpr.optimize},
                                    {"restarts", gpr.restarts},
                                    {"bounds", {gpr.lower, gpr.upper}},
                                    {"max_iterations", gpr.lbfgs.max_iterations}};
            break;
        case Family::rf:
            j["hyperparameters"] = {{"n_trees", rf.n_trees},
                                    {"bootstrap", rf.bootstrap},
                                    {"max_depth", rf.tree.max_depth},
                                    {"min_samples_leaf", rf.tree.min_samples_leaf},
                                    {"per_output", rf_per_output}};
            break;
        case Family::gbt:
            j["hyperparameters"] = {
                {"n_stages", gbt.n_stages}, {"max_depth", gbt.max_depth}, {"learning_rate", gbt.learning_rate}};
            break;
        }
        return j;
    }

    static RegressorSpec from_json(const nlohmann::json& j) {
        RegressorSpec s;
        s.family = parse_family(j.at("family").get<std::string>());
        s.seed = j.at("seed").get<std::uint64_t>();
        const auto& h = j.at("hyperparameters");
        switch (s.family) {
        case Family::nn:
            s.nn.hidden = h.at("hidden").get<std::vector<int>>();
            s.nn.epochs = h.at("epochs").get<int>();
            s.nn.batch_size = h.at("batch_size").get<int>();
            s.nn.learning_rate = h.at("learning_rate").get<double>();
            s.nn.l2 = h.at("l2").get<double>();
            s.nn.beta1 = h.at("beta1").get<double>();
            s.nn.beta2 = h.at("beta2").get<double>();
            s.nn.epsilon = h.at("epsilon").get<double>();
            break;
        case Family::gpr: {
            const auto init = h.at("init").get<std::vector<double>>();
            const auto bounds = h.at("bounds").get<std::vector<double>>();
            if (init.size() != 4 || bounds.size() != 2) throw ValidationError("gpr: malformed hyperparameters");
            s.gpr.init = {init[0], init[1], init[2], init[3]};
            s.gpr.optimize = h.at("optimize").get<bool>();
            s.gpr.restarts = h.at("restarts").get<int>();
            s.gpr.lower = bounds[0];
            s.gpr.upper = bounds[1];
            s.gpr.lbfgs.max_iterations = h.at("max_iterations").get<int>();
            break;
        }
        case Family::rf:
            s.rf.n_trees = h.at("n_trees").get<int>();
            s.rf.bootstrap = h.at("bootstrap").get<bool>();
            s.rf.tree.max_depth = h.at("max_depth").get<int>();
            s.rf.tree.min_samples_leaf = h.at("min_samples_leaf").get<int>();
            s.rf_per_output = h.at("per_output").get<bool>();
            break;
        case Family::gbt:
            s.gbt.n_stages = h.at("n_stages").get<int>();
            s.gbt.max_depth = h.at("max_depth").get<int>();
            s.gbt.learning_rate = h.at("learning_rate").get<double>();
            break;
        }
        s.validate();
        return s;
    }
};

/// Output axis description carried by a trained model.
struct GridMeta {
    std::string model = "unknown";
    bool banded = false;
    std::vector<double> frequencies;

    static GridMeta from(const DatasetMeta& m) { return {m.model, m.banded, m.frequencies}; }

    nlohmann::json to_json() const { return {{"model", model}, {"banded", banded}, {"frequencies", frequencies}}; }
    static GridMeta from_json(const nlohmann::json& j) {
        return {j.at("model").get<std::string>(), j.at("banded").get<bool>(),
                j.at("frequencies").get<std::vector<double>>()};
    }
    bool operator==(const GridMeta&) const = default;
};

namespace detail {

inline RowMatrix to_row_major(const Eigen::MatrixXd& Y) { return Y; }

inline Eigen::MatrixXd per_output_forest_predict(const std::vector<RandomForest>& forests, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(forests.size()));
    for (std::size_t j = 0; j < forests.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = forests[j].predict(X);
    return out;
}

} // namespace detail

/// A trained regressor with the preprocessing needed to map raw design rows
/// (design-table units) to STL predictions.
class SurrogateModel {
public:
    using Fitted = std::variant<Mlp, GaussianProcess, RandomForest, std::vector<RandomForest>, GradientBoosting>;

    const RegressorSpec& spec() const { return spec_; }
    Recipe recipe() const { return recipe_; }
    const GridMeta& grid() const { return grid_; }
    const std::optional<Scaler>& input_scaler() const { return input_scaler_; }
    const std::optional<Scaler>& output_scaler() const { return output_scaler_; }
    const Fitted& fitted() const { return fitted_; }
    Eigen::Index n_outputs() const { return static_cast<Eigen::Index>(grid_.frequencies.size()); }

    /// Features as the fitted regressor sees them.
    Eigen::MatrixXd features(const Eigen::MatrixXd& X_raw) const {
        if (X_raw.cols() != static_cast<Eigen::Index>(kDesignDims))
            throw ValidationError("predict: expected 7 raw input columns, got " + std::to_string(X_raw.cols()));
        Eigen::MatrixXd Xa = augment(X_raw, recipe_);
        return input_scaler_ ? input_scaler_->apply(Xa) : Xa;
    }

    Eigen::MatrixXd predict(const Eigen::MatrixXd& X_raw) const {
        const Eigen::MatrixXd Xf = features(X_raw);
        Eigen::MatrixXd Y = std::visit(
            [&](const auto& m) -> Eigen::MatrixXd {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, std::vector<RandomForest>>)
                    return detail::per_output_forest_predict(m, Xf);
                else
                    return m.predict(Xf);
            },
            fitted_);
        if (output_scaler_) Y = output_scaler_->invert(Y);
        if (!Y.allFinite()) throw NumericError("predict: non-finite prediction");
        return Y;
    }

    nlohmann::json to_json() const {
        nlohmann::json params = std::visit(
            [](const auto& m) -> nlohmann::json {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, std::vector<RandomForest>>) {
                    nlohmann::json arr = nlohmann::json::array();
                    for (const auto& f : m) arr.push_back(f.to_json());
                    return {{"forests", std::move(arr)}};
                } else {
                    return m.to_json();
                }
            },
            fitted_);
        nlohmann::json scalers{{"input", input_scaler_ ? input_scaler_->to_json() : nlohmann::json(nullptr)},
                               {"output", output_scaler_ ? output_scaler_->to_json() : nlohmann::json(nullptr)}};
        return {{"format_version", kModelFormatVersion},
                {"family", to_string(spec_.family)},
                {"recipe", to_string(recipe_)},
                {"spec", spec_.to_json()},
                {"scalers", std::move(scalers)},
                {"params", std::move(params)},
                {"grid_meta", grid_.to_json()}};
    }

    static SurrogateModel from_json(const nlohmann::json& j) {
        SurrogateModel m;
        try {
            const int version = j.at("format_version").get<int>();
            if (version != kModelFormatVersion)
                throw ValidationError("model artifact has format_version " + std::to_string(version) +
                                      ", this build reads version " + std::to_string(kModelFormatVersion));
            const Family family = parse_family(j.at("family").get<std::string>());
            m.recipe_ = parse_recipe(j.at("recipe").get<std::string>());
            m.spec_ = RegressorSpec::from_json(j.at("spec"));
            if (m.spec_.family != family) throw ValidationError("model artifact: family and spec disagree");
            const auto& sc = j.at("scalers");
            if (!sc.at("input").is_null()) m.input_scaler_ = Scaler::from_json(sc.at("input"));
            if (!sc.at("output").is_null()) m.output_scaler_ = Scaler::from_json(sc.at("output"));
            m.grid_ = GridMeta::from_json(j.at("grid_meta"));
            const auto& p = j.at("params");
            switch (family) {
            case Family::nn: m.fitted_ = Mlp::from_json(p); break;
            case Family::gpr: m.fitted_ = GaussianProcess::from_json(p); break;
            case Family::gbt: m.fitted_ = GradientBoosting::from_json(p); break;
            case Family::rf:
                if (m.spec_.rf_per_output) {
                    std::vector<RandomForest> forests;
                    for (const auto& fj : p.at("forests")) forests.push_back(RandomForest::from_json(fj));
                    m.fitted_ = std::move(forests);
                } else {
                    m.fitted_ = RandomForest::from_json(p);
                }
                break;
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("model artifact: ") + e.what());
        }
        return m;
    }

private:
    friend SurrogateModel train(const RegressorSpec&, Recipe, const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                                const GridMeta&, int);

    RegressorSpec spec_;
    Recipe recipe_ = Recipe::base;
    GridMeta grid_;
    std::optional<Scaler> input_scaler_;
    std::optional<Scaler> output_scaler_;
    Fitted fitted_;
};

/// Fits `spec` on raw design rows X_raw (design-table units) and targets Y.
/// NN and GPR see standardized inputs and [0, 1]-scaled outputs.
inline SurrogateModel train(const RegressorSpec& spec, Recipe recipe, const Eigen::MatrixXd& X_raw,
                            const Eigen::MatrixXd& Y, const GridMeta& grid, int threads = 1) {
    spec.validate();
    if (X_raw.rows() < 2) throw ValidationError("train: need at least 2 rows, got " + std::to_string(X_raw.rows()));
    if (X_raw.rows() != Y.rows())
        throw ValidationError("train: X has " + std::to_string(X_raw.rows()) + " rows but Y has " +
                              std::to_string(Y.rows()));
    if (Y.cols() < 1) throw ValidationError("train: Y has no columns");
    if (grid.frequencies.size() != static_cast<std::size_t>(Y.cols()))
        throw ValidationError("train: grid lists " + std::to_string(grid.frequencies.size()) +
                              " frequencies but Y has " + std::to_string(Y.cols()) + " columns");
    if (!X_raw.allFinite() || !Y.allFinite()) throw ValidationError("train: non-finite values in training data");

    SurrogateModel m;
    m.spec_ = spec;
    m.recipe_ = recipe;
    m.grid_ = grid;
    Eigen::MatrixXd Xa = augment(X_raw, recipe);
    const bool scaled = spec.family == Family::nn || spec.family == Family::gpr;
    if (scaled) {
        m.input_scaler_ = Scaler::fit(Xa, ScalerKind::standardize, feature_names(recipe));
        Xa = m.input_scaler_->apply(Xa);
        m.output_scaler_ = Scaler::fit(Y, ScalerKind::minmax);
    }
    const Eigen::MatrixXd Ys = scaled ? m.output_scaler_->apply(Y) : Y;

    switch (spec.family) {
    case Family::nn: {
        Mlp net(static_cast<int>(Xa.cols()), spec.nn.hidden, static_cast<int>(Ys.cols()));
        Rng init(derive_seed(spec.seed, 0));
        net.init_glorot(init);
        net.fit(Xa, Ys, spec.nn, derive_seed(spec.seed, 1));
        m.fitted_ = std::move(net);
        break;
    }
    case Family::gpr: {
        GaussianProcess gp;
        gp.fit(Xa, Ys, spec.gpr, spec.seed, threads);
        m.fitted_ = std::move(gp);
        break;
    }
    case Family::rf: {
        if (spec.rf_per_output) {
            std::vector<RandomForest> forests(static_cast<std::size_t>(Ys.cols()));
            parallel_for(forests.size(), threads, [&](std::size_t j) {
                const RowMatrix yj = Ys.col(static_cast<Eigen::Index>(j));
                forests[j].fit(Xa, yj, derive_seed(spec.seed, j), spec.rf, 1);
            });
            m.fitted_ = std::move(forests);
        } else {
            RandomForest rf;
            rf.fit(Xa, detail::to_row_major(Ys), spec.seed, spec.rf, threads);
            m.fitted_ = std::move(rf);
        }
        break;
    }
    case Family::gbt: {
        GradientBoosting gb;
        gb.fit(Xa, detail::to_row_major(Ys), spec.gbt, threads);
        m.fitted_ = std::move(gb);
        break;
    }
    }
    return m;
}

inline void save_model(const SurrogateModel& m, const std::string& path) { write_text_file(path, m.to_json().dump()); }

inline SurrogateModel load_model(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return SurrogateModel::from_json(j);
}

/// Train on one split and predict another without keeping the fitted model;
/// per-output forests are fitted and evaluated one column at a time. The
/// returned time covers fitting only.
struct FitPredict {
    Eigen::MatrixXd Y_hat;
    double train_seconds = 0.0;
};

inline FitPredict fit_predict(const RegressorSpec& spec, Recipe recipe, const Eigen::MatrixXd& X_train,
                              const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& X_test, int threads = 1) {
    using clock = std::chrono::steady_clock;
    FitPredict out;
    if (spec.family == Family::rf && spec.rf_per_output) {
        spec.validate();
        if (X_train.rows() < 2) throw ValidationError("train: need at least 2 rows");
        const Eigen::MatrixXd Xa = augment(X_train, recipe);
        const Eigen::MatrixXd Xt = augment(X_test, recipe);
        out.Y_hat.resize(X_test.rows(), Y_train.cols());
        std::vector<double> seconds(static_cast<std::size_t>(Y_train.cols()), 0.0);
        ForestOptions opt = spec.rf;
        opt.keep_members = false;
        parallel_for(seconds.size(), threads, [&](std::size_t j) {
            const auto t0 = clock::now();
            RandomForest rf;
            const RowMatrix yj = Y_train.col(static_cast<Eigen::Index>(j));
            rf.fit(Xa, yj, derive_seed(spec.seed, j), opt, 1);
            seconds[j] = std::chrono::duration<double>(clock::now() - t0).count();
            out.Y_hat.col(static_cast<Eigen::Index>(j)) = rf.predict(Xt);
        });
        for (double s : seconds) out.train_seconds += s;
        return out;
    }
    GridMeta grid;
    grid.frequencies.assign(static_cast<std::size_t>(Y_train.cols()), 0.0);
    const auto t0 = clock::now();
    const SurrogateModel m = train(spec, recipe, X_train, Y_train, grid, threads);
    out.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    out.Y_hat = m.predict(X_test);
    return out;
}

} // namespace stllab
