#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stllab/diffuse.hpp"
#include "stllab/format.hpp"
#include "stllab/parallel.hpp"
#include "stllab/random.hpp"

namespace stllab {

inline constexpr const char* kGeneratorVersion = "stllab-dataset/1";
inline constexpr std::size_t kDesignDims = 7;
inline constexpr std::array<const char*, kDesignDims> kDesignColumns = {"rho", "E", "nu", "eta", "h", "a", "b"};
inline constexpr std::array<const char*, kDesignDims> kSpaceKeys = {"rho", "E_gpa", "nu", "eta_percent", "h_mm", "a", "b"};

/// Box of plate designs in design-table units (rho kg/m^3, E GPa, nu, eta %, h mm, a m, b m).
struct DesignSpace {
    std::array<double, kDesignDims> lower{};
    std::array<double, kDesignDims> upper{};

    static DesignSpace reference() {
        return {{2000.0, 60.0, 0.25, 0.1, 5.0, 0.3, 0.3}, {3000.0, 150.0, 0.35, 2.0, 7.0, 0.6, 0.6}};
    }

    void validate() const {
        for (std::size_t d = 0; d < kDesignDims; ++d) {
            if (!(lower[d] < upper[d]))
                throw ValidationError(std::string("design space: '") + kSpaceKeys[d] + "' needs lower < upper");
        }
        // corners must be valid plates; every variable maps monotonically
        PlateSpec::from_design_row(lower);
        PlateSpec::from_design_row(upper);
    }

    PlateSpec midpoint() const {
        std::array<double, kDesignDims> mid{};
        for (std::size_t d = 0; d < kDesignDims; ++d) mid[d] = 0.5 * (lower[d] + upper[d]);
        return PlateSpec::from_design_row(mid);
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t d = 0; d < kDesignDims; ++d) j[kSpaceKeys[d]] = {lower[d], upper[d]};
        return j;
    }

    static DesignSpace from_json(const nlohmann::json& j) {
        DesignSpace s;
        for (std::size_t d = 0; d < kDesignDims; ++d) {
            const char* key = kSpaceKeys[d];
            if (!j.contains(key)) throw ValidationError(std::string("design space: missing key '") + key + "'");
            const auto& v = j.at(key);
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ValidationError(std::string("design space: '") + key + "' must be [lower, upper]");
            s.lower[d] = v[0].get<double>();
            s.upper[d] = v[1].get<double>();
        }
        s.validate();
        return s;
    }
};

/// Latin hypercube: per dimension, one point in each of n equal strata, strata
/// order permuted independently, uniform jitter inside each stratum.
inline Eigen::MatrixXd lhs_sample(const DesignSpace& space, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("lhs_sample: n must be >= 1");
    space.validate();
    Rng rng(seed);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kDesignDims));
    for (std::size_t d = 0; d < kDesignDims; ++d) {
        const auto perm = rng.permutation(n);
        const double lo = space.lower[d];
        const double width = space.upper[d] - lo;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = lo + u * width;
        }
    }
    return X;
}

struct DatasetMeta {
    std::string model = "unknown";
    bool banded = false;
    std::vector<double> frequencies; // grid frequencies or band centers
    std::uint64_t seed = 0;
    std::optional<DesignSpace> space;
    std::string generator_version = kGeneratorVersion;
    nlohmann::json numerics = nlohmann::json::object(); // fluid, quadrature, truncation echo

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["model"] = model;
        j["banded"] = banded;
        j["frequencies"] = frequencies;
        j["seed"] = seed;
        j["space"] = space ? space->to_json() : nlohmann::json(nullptr);
        j["generator_version"] = generator_version;
        j["numerics"] = numerics;
        return j;
    }

    static DatasetMeta from_json(const nlohmann::json& j) {
        DatasetMeta m;
        try {
            m.model = j.at("model").get<std::string>();
            m.banded = j.at("banded").get<bool>();
            m.frequencies = j.at("frequencies").get<std::vector<double>>();
            m.seed = j.at("seed").get<std::uint64_t>();
            if (!j.at("space").is_null()) m.space = DesignSpace::from_json(j.at("space"));
            m.generator_version = j.at("generator_version").get<std::string>();
            m.numerics = j.value("numerics", nlohmann::json::object());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("dataset meta: ") + e.what());
        }
        return m;
    }

    bool operator==(const DatasetMeta& o) const { return to_json() == o.to_json(); }
};

/// Designs (N x 7, design-table units) paired with STL responses (N x F, dB).
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    DatasetMeta meta;

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index outputs() const { return Y.cols(); }

    void validate() const {
        if (X.cols() != static_cast<Eigen::Index>(kDesignDims))
            throw ValidationError("dataset: X must have 7 columns, got " + std::to_string(X.cols()));
        if (X.rows() != Y.rows())
            throw ValidationError("dataset: X has " + std::to_string(X.rows()) + " rows but Y has " +
                                  std::to_string(Y.rows()));
        if (meta.frequencies.size() != static_cast<std::size_t>(Y.cols()))
            throw ValidationError("dataset: meta lists " + std::to_string(meta.frequencies.size()) +
                                  " frequencies but Y has " + std::to_string(Y.cols()) + " columns");
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                if (!std::isfinite(X(i, j)))
                    throw ValidationError("dataset: non-finite value at row " + std::to_string(i) + ", column " +
                                          kDesignColumns[static_cast<std::size_t>(j)]);
            for (Eigen::Index j = 0; j < Y.cols(); ++j)
                if (!std::isfinite(Y(i, j)))
                    throw ValidationError("dataset: non-finite value at row " + std::to_string(i) + ", output column " +
                                          std::to_string(j));
        }
    }

    /// First n rows (generation order).
    Dataset head(Eigen::Index n) const {
        if (n < 1 || n > rows())
            throw ValidationError("dataset: requested " + std::to_string(n) + " rows of " + std::to_string(rows()));
        return {X.topRows(n), Y.topRows(n), meta};
    }

    Dataset select(const std::vector<Eigen::Index>& idx) const {
        Dataset out{Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()), X.cols()),
                    Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()), Y.cols()), meta};
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.X.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
            out.Y.row(static_cast<Eigen::Index>(r)) = Y.row(idx[r]);
        }
        return out;
    }
};

struct GenerationOptions {
    FrequencyGrid grid = FrequencyGrid::standard();
    std::optional<BandScheme> bands; // band-average each curve when set
    SimulationConfig sim{};
    int threads = 0;
};

inline nlohmann::json numerics_echo(StlModel model, const GenerationOptions& opt) {
    nlohmann::json j;
    j["fluid"] = {{"rho0", opt.sim.fluid.rho0}, {"c0", opt.sim.fluid.c0}};
    j["quadrature"] = {{"n_theta", opt.sim.quad.n_theta()},
                       {"n_phi", opt.sim.quad.n_phi()},
                       {"theta_max", opt.sim.quad.theta_max()},
                       {"split_at_coincidence", opt.sim.quad.split_at_coincidence()}};
    j["grid"] = {{"f_min", opt.grid.min()}, {"f_max", opt.grid.max()}, {"n", opt.grid.size()}};
    if (model == StlModel::modal)
        j["truncation"] = {{"max_m", opt.sim.truncation.max_m},
                           {"max_n", opt.sim.truncation.max_n},
                           {"freq_factor", opt.sim.truncation.freq_factor}};
    if (model == StlModel::correction)
        j["radiation"] = {{"base_order", opt.sim.radiation.base_order},
                          {"nodes_per_radian", opt.sim.radiation.nodes_per_radian},
                          {"fixed_order", opt.sim.radiation.fixed_order}};
    return j;
}

/// STL curve (banded when requested) of one design row.
inline StlCurve simulate_design(StlModel model, const PlateSpec& plate, const GenerationOptions& opt) {
    StlCurve c = stl_curve(model, plate, opt.grid, opt.sim);
    return opt.bands ? band_average(c, *opt.bands) : c;
}

inline Dataset generate_dataset(StlModel model, const DesignSpace& space, std::size_t n, std::uint64_t seed,
                                const GenerationOptions& opt = {}) {
    Dataset ds;
    ds.X = lhs_sample(space, n, seed);
    ds.meta.model = to_string(model);
    ds.meta.banded = opt.bands.has_value();
    ds.meta.frequencies = opt.bands ? opt.bands->centers() : opt.grid.values();
    ds.meta.seed = seed;
    ds.meta.space = space;
    ds.meta.numerics = numerics_echo(model, opt);
    ds.Y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ds.meta.frequencies.size()));
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        std::array<double, kDesignDims> design{};
        for (std::size_t d = 0; d < kDesignDims; ++d) design[d] = ds.X(row, static_cast<Eigen::Index>(d));
        try {
            const PlateSpec plate = PlateSpec::from_design_row(design);
            const StlCurve c = simulate_design(model, plate, opt);
            for (std::size_t j = 0; j < c.size(); ++j) ds.Y(row, static_cast<Eigen::Index>(j)) = c.stl_db[j];
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "generate_dataset: simulation failed for row " << i << " (";
            for (std::size_t d = 0; d < kDesignDims; ++d)
                msg << (d ? ", " : "") << kDesignColumns[d] << "=" << format_double(design[d]);
            msg << "): " << e.what();
            throw NumericError(msg.str());
        }
    });
    ds.validate();
    return ds;
}

// ---- persistence -----------------------------------------------------------

inline std::string meta_path_for(const std::string& csv_path) {
    const std::string ext = ".csv";
    if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
        return csv_path.substr(0, csv_path.size() - ext.size()) + ".meta.json";
    return csv_path + ".meta.json";
}

inline std::string dataset_to_csv(const Dataset& ds) {
    std::string s;
    for (std::size_t d = 0; d < kDesignDims; ++d) s += std::string(d ? "," : "") + kDesignColumns[d];
    for (double f : ds.meta.frequencies) s += ",STL@" + format_double(f);
    s += "\n";
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j) s += (j ? "," : "") + format_double(ds.X(i, j));
        for (Eigen::Index j = 0; j < ds.Y.cols(); ++j) s += "," + format_double(ds.Y(i, j));
        s += "\n";
    }
    return s;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    write_text_file(path, dataset_to_csv(ds));
    write_text_file(meta_path_for(path), ds.meta.to_json().dump(2) + "\n");
}

/// Parses the CSV body; meta comes from the sidecar when present, otherwise
/// frequencies are recovered from the STL@<hz> header labels.
inline Dataset dataset_from_csv(const std::string& text, const std::optional<DatasetMeta>& sidecar,
                                const std::string& label = "dataset") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(label + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() <= kDesignDims) throw ParseError(label + ": header has no STL columns (line 1)");
    for (std::size_t d = 0; d < kDesignDims; ++d)
        if (header[d] != kDesignColumns[d])
            throw ParseError(label + ": line 1, column " + std::to_string(d + 1) + ": expected '" + kDesignColumns[d] +
                             "', found '" + header[d] + "'");
    std::vector<double> freqs;
    for (std::size_t c = kDesignDims; c < header.size(); ++c) {
        double f = 0.0;
        if (header[c].rfind("STL@", 0) != 0 || !parse_double(std::string_view(header[c]).substr(4), f))
            throw ParseError(label + ": line 1, column " + std::to_string(c + 1) + ": expected 'STL@<hz>', found '" +
                             header[c] + "'");
        freqs.push_back(f);
    }
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(label + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        std::vector<double> r(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], r[c]))
                throw ParseError(label + ": line " + std::to_string(line_no) + ", column '" + header[c] +
                                 "': cannot parse '" + cells[c] + "'");
            if (!std::isfinite(r[c]))
                throw ValidationError(label + ": non-finite value at row " + std::to_string(rows.size()) +
                                      ", column '" + header[c] + "' (line " + std::to_string(line_no) + ")");
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError(label + ": no data rows");
    Dataset ds;
    const auto n = static_cast<Eigen::Index>(rows.size());
    ds.X.resize(n, static_cast<Eigen::Index>(kDesignDims));
    ds.Y.resize(n, static_cast<Eigen::Index>(freqs.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (std::size_t d = 0; d < kDesignDims; ++d) ds.X(i, static_cast<Eigen::Index>(d)) = r[d];
        for (std::size_t c = 0; c < freqs.size(); ++c) ds.Y(i, static_cast<Eigen::Index>(c)) = r[kDesignDims + c];
    }
    if (sidecar) {
        ds.meta = *sidecar;
        if (ds.meta.frequencies.size() != freqs.size())
            throw ParseError(label + ": meta sidecar lists " + std::to_string(ds.meta.frequencies.size()) +
                             " frequencies, CSV header has " + std::to_string(freqs.size()));
    } else {
        ds.meta.frequencies = freqs;
    }
    ds.validate();
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    const std::string text = read_text_file(path);
    std::optional<DatasetMeta> meta;
    const std::string mp = meta_path_for(path);
    if (std::ifstream(mp).good()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(mp));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(mp + ": " + e.what());
        }
        meta = DatasetMeta::from_json(j);
    }
    return dataset_from_csv(text, meta, path);
}

} // namespace stllab
