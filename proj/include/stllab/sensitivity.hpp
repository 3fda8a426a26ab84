#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stllab/dataset.hpp"
#include "stllab/forest.hpp"
#include "stllab/preprocess.hpp"

namespace stllab {

/// Normalized MDI importances of a fitted forest.
inline Importances mdi_importances(const RandomForest& rf) { return rf.importances(); }

/// Feature x frequency matrix of normalized importances.
struct ImportanceMap {
    std::vector<std::string> features;
    std::vector<double> frequencies;
    Eigen::MatrixXd values;       // features x frequencies
    std::vector<bool> degenerate; // per frequency: no split in any tree

    Eigen::Index argmax(Eigen::Index column) const {
        Eigen::Index best = 0;
        values.col(column).maxCoeff(&best);
        return best;
    }

    Eigen::Index feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i] == name) return static_cast<Eigen::Index>(i);
        throw ValidationError("importance map has no feature '" + name + "'");
    }
};

struct SensitivityOptions {
    ForestOptions forest{200, true, {}, false};
    std::optional<std::vector<std::size_t>> columns; // subset of output columns; all when empty
    int threads = 1;
};

/// One single-output forest per selected output column, each seeded from
/// (seed, column index).
inline ImportanceMap importance_map(const Dataset& ds, Recipe recipe, std::uint64_t seed,
                                    const SensitivityOptions& opt = {}) {
    ds.validate();
    if (ds.rows() < 2) throw ValidationError("importance map: need at least 2 rows");
    std::vector<std::size_t> cols;
    if (opt.columns) {
        cols = *opt.columns;
        for (std::size_t c : cols)
            if (c >= static_cast<std::size_t>(ds.outputs()))
                throw ValidationError("importance map: column " + std::to_string(c) + " out of range");
    } else {
        for (Eigen::Index c = 0; c < ds.outputs(); ++c) cols.push_back(static_cast<std::size_t>(c));
    }
    const Eigen::MatrixXd Xa = augment(ds.X, recipe);
    ImportanceMap map;
    map.features = feature_names(recipe);
    map.values.resize(Xa.cols(), static_cast<Eigen::Index>(cols.size()));
    map.degenerate.assign(cols.size(), false);
    for (std::size_t c : cols) map.frequencies.push_back(ds.meta.frequencies[c]);

    std::vector<Importances> imps(cols.size());
    parallel_for(cols.size(), opt.threads, [&](std::size_t k) {
        RandomForest rf;
        const RowMatrix y = ds.Y.col(static_cast<Eigen::Index>(cols[k]));
        rf.fit(Xa, y, derive_seed(seed, cols[k]), opt.forest, 1);
        imps[k] = rf.importances();
    });
    for (std::size_t k = 0; k < cols.size(); ++k) {
        for (std::size_t f = 0; f < imps[k].values.size(); ++f)
            map.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = imps[k].values[f];
        map.degenerate[k] = imps[k].degenerate;
    }
    return map;
}

inline std::string importance_map_to_csv(const ImportanceMap& map) {
    std::string out = "feature";
    for (double f : map.frequencies) out += ",imp@" + format_double(f);
    out += '\n';
    for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
        out += map.features[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < map.values.cols(); ++k) out += "," + format_double(map.values(i, k));
        out += '\n';
    }
    return out;
}

} // namespace stllab
