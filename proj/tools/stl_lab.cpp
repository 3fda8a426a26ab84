// stl_lab: simulate plate STL curves, sample datasets, train and benchmark surrogates.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stllab/stllab.hpp"

using namespace stllab;

namespace {

struct Common {
    std::uint64_t seed = 0;
    int threads = 0;

    int resolved_threads() const { return threads > 0 ? threads : default_threads(); }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    app->add_option("--threads", c.threads, "Worker threads (0: STL_LAB_THREADS or 1)")->capture_default_str();
}

struct Numerics {
    double f_min = 50.0;
    double f_max = 2500.0;
    int n_freq = 128;
    int n_theta = 64;
    int n_phi = 16;
    double freq_factor = ModalTruncation{}.freq_factor;
    int max_modes = 40;
    bool bands = false;

    GenerationOptions options(int threads) const {
        GenerationOptions g;
        g.grid = FrequencyGrid::geometric(f_min, f_max, n_freq);
        if (bands) g.bands = BandScheme::standard();
        g.sim.quad = QuadratureScheme(n_theta, n_phi);
        g.sim.truncation = {max_modes, max_modes, freq_factor};
        g.threads = threads;
        return g;
    }
};

void add_numerics(CLI::App* app, Numerics& n) {
    app->add_option("--fmin", n.f_min, "Lowest grid frequency (Hz)")->capture_default_str();
    app->add_option("--fmax", n.f_max, "Highest grid frequency (Hz)")->capture_default_str();
    app->add_option("--nfreq", n.n_freq, "Number of geometric grid points")->capture_default_str();
    app->add_option("--n-theta", n.n_theta, "Gauss-Legendre nodes in elevation")->capture_default_str();
    app->add_option("--n-phi", n.n_phi, "Gauss-Legendre nodes per azimuth quarter")->capture_default_str();
    app->add_option("--freq-factor", n.freq_factor, "Modal cut-off as a multiple of the top frequency")
        ->capture_default_str();
    app->add_option("--max-modes", n.max_modes, "Modal index limit in each direction")->capture_default_str();
    app->add_flag("--bands", n.bands, "Average onto third-octave bands (63 Hz to 2 kHz)");
}

nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Design rows from a CSV whose first seven columns are rho,E,nu,eta,h,a,b.
Eigen::MatrixXd read_designs(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < kDesignDims) throw ParseError(path + ": header needs the 7 design columns");
    for (std::size_t d = 0; d < kDesignDims; ++d)
        if (header[d] != kDesignColumns[d])
            throw ParseError(path + ": line 1, column " + std::to_string(d + 1) + ": expected '" + kDesignColumns[d] +
                             "', found '" + header[d] + "'");
    std::vector<std::array<double, kDesignDims>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        std::array<double, kDesignDims> r{};
        for (std::size_t d = 0; d < kDesignDims; ++d)
            if (!parse_double(cells[d], r[d]) || !std::isfinite(r[d]))
                throw ParseError(path + ": line " + std::to_string(line_no) + ", column '" + header[d] +
                                 "': cannot parse '" + cells[d] + "'");
        rows.push_back(r);
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kDesignDims));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t d = 0; d < kDesignDims; ++d) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    return X;
}

std::string predictions_to_csv(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const GridMeta& grid) {
    std::string out;
    for (std::size_t d = 0; d < kDesignDims; ++d) out += std::string(d ? "," : "") + kDesignColumns[d];
    for (double f : grid.frequencies) out += ",STL@" + format_double(f);
    out += '\n';
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index d = 0; d < X.cols(); ++d) out += (d ? "," : "") + format_double(X(i, d));
        for (Eigen::Index j = 0; j < Y.cols(); ++j) out += "," + format_double(Y(i, j));
        out += '\n';
    }
    return out;
}

struct Hyper {
    std::optional<int> epochs;
    std::optional<int> trees;
    std::optional<int> stages;
    std::optional<int> restarts;
    std::optional<int> gpr_iterations;
    bool per_output = false;

    void apply(RegressorSpec& s) const {
        if (epochs) s.nn.epochs = *epochs;
        if (trees) s.rf.n_trees = *trees;
        if (stages) s.gbt.n_stages = *stages;
        if (restarts) s.gpr.restarts = *restarts;
        if (gpr_iterations) s.gpr.lbfgs.max_iterations = *gpr_iterations;
        if (per_output) s.rf_per_output = true;
    }
};

void add_hyper(CLI::App* app, Hyper& h) {
    app->add_option("--epochs", h.epochs, "nn: training epochs (default 1500, 2500 for modal data)");
    app->add_option("--trees", h.trees, "rf: number of trees (default 200)");
    app->add_option("--stages", h.stages, "gbt: boosting stages (default 125)");
    app->add_option("--restarts", h.restarts, "gpr: optimizer restarts (default 10)");
    app->add_option("--gpr-iterations", h.gpr_iterations, "gpr: L-BFGS-B iteration limit per start (default 100)");
    app->add_flag("--per-output", h.per_output, "rf: one single-output forest per frequency column");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plate sound transmission loss simulators and surrogate models"};
    app.require_subcommand(1);

    // simulate
    Common sim_c;
    Numerics sim_n;
    std::string sim_model = "infinite", sim_plate, sim_out;
    auto* sim = app.add_subcommand("simulate", "STL curve of one plate");
    sim->add_option("--model", sim_model, "infinite | correction | modal")->capture_default_str();
    sim->add_option("--plate", sim_plate, "Plate JSON (rho, E [GPa], nu, eta_percent, h_mm, a, b)")->required();
    sim->add_option("--out", sim_out, "Output CSV (default: standard output)");
    add_numerics(sim, sim_n);
    add_common(sim, sim_c);

    // sample
    Common smp_c;
    Numerics smp_n;
    std::string smp_model = "infinite", smp_space, smp_out;
    std::size_t smp_count = 0;
    auto* smp = app.add_subcommand("sample", "Latin hypercube dataset of simulated curves");
    smp->add_option("--space", smp_space, "Design space JSON (default: the built-in reference box)");
    smp->add_option("--model", smp_model, "infinite | correction | modal")->capture_default_str();
    smp->add_option("--n", smp_count, "Number of designs")->required();
    smp->add_option("--out", smp_out, "Output CSV; metadata goes to <out>.meta.json")->required();
    add_numerics(smp, smp_n);
    add_common(smp, smp_c);

    // train
    Common trn_c;
    Hyper trn_h;
    std::string trn_data, trn_family = "nn", trn_recipe = "physics_r", trn_out;
    auto* trn = app.add_subcommand("train", "Fit a surrogate on a dataset");
    trn->add_option("--data", trn_data, "Dataset CSV")->required();
    trn->add_option("--family", trn_family, "nn | gpr | rf | gbt")->capture_default_str();
    trn->add_option("--recipe", trn_recipe, "base | physics | physics_r")->capture_default_str();
    trn->add_option("--out", trn_out, "Model artifact (JSON)")->required();
    add_hyper(trn, trn_h);
    add_common(trn, trn_c);

    // predict
    Common prd_c;
    std::string prd_model, prd_input, prd_out;
    auto* prd = app.add_subcommand("predict", "Evaluate a trained surrogate");
    prd->add_option("--model", prd_model, "Model artifact (JSON)")->required();
    prd->add_option("--input", prd_input, "CSV whose first columns are rho,E,nu,eta,h,a,b")->required();
    prd->add_option("--out", prd_out, "Output CSV (default: standard output)");
    add_common(prd, prd_c);

    // benchmark
    Common bm_c;
    Hyper bm_h;
    std::vector<std::string> bm_data;
    std::string bm_families = "nn,gpr,rf,gbt", bm_recipes = "base,physics,physics_r", bm_sizes, bm_report, bm_csv;
    int bm_cv = 5;
    double bm_holdout = 0.0;
    bool bm_omit_timing = false;
    auto* bm = app.add_subcommand("benchmark", "Cross-validated accuracy over families, recipes and sizes");
    bm->add_option("--data", bm_data, "Dataset CSV(s)")->required()->delimiter(',');
    bm->add_option("--families", bm_families, "Comma-separated families")->capture_default_str();
    bm->add_option("--recipes", bm_recipes, "Comma-separated recipes")->capture_default_str();
    bm->add_option("--sizes", bm_sizes, "Comma-separated subset sizes (first n rows; default: all rows)");
    bm->add_option("--cv", bm_cv, "Number of folds")->capture_default_str();
    bm->add_option("--holdout", bm_holdout, "Use one split with this test fraction instead of k-fold CV");
    bm->add_option("--report", bm_report, "Report JSON")->required();
    bm->add_option("--csv", bm_csv, "Flat CSV report");
    bm->add_flag("--omit-timing", bm_omit_timing, "Leave train_s empty so reports are byte-reproducible");
    add_hyper(bm, bm_h);
    add_common(bm, bm_c);

    // sensitivity
    Common sen_c;
    std::string sen_data, sen_recipe = "base", sen_out;
    int sen_trees = 200;
    auto* sen = app.add_subcommand("sensitivity", "Per-frequency MDI importance map");
    sen->add_option("--data", sen_data, "Dataset CSV")->required();
    sen->add_option("--recipe", sen_recipe, "base | physics | physics_r")->capture_default_str();
    sen->add_option("--trees", sen_trees, "Trees per frequency")->capture_default_str();
    sen->add_option("--out", sen_out, "Output CSV (default: standard output)");
    add_common(sen, sen_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) {
            const PlateSpec plate = plate_from_json(read_json(sim_plate));
            const StlModel model = parse_stl_model(sim_model);
            const GenerationOptions opt = sim_n.options(sim_c.resolved_threads());
            emit(sim_out, curve_to_csv(simulate_design(model, plate, opt)));
        } else if (*smp) {
            const DesignSpace space = smp_space.empty() ? DesignSpace::reference() : DesignSpace::from_json(read_json(smp_space));
            if (smp_count < 1) throw ValidationError("sample: --n must be >= 1");
            const StlModel model = parse_stl_model(smp_model);
            const Dataset ds = generate_dataset(model, space, smp_count, smp_c.seed, smp_n.options(smp_c.resolved_threads()));
            save_dataset(ds, smp_out);
        } else if (*trn) {
            const Dataset ds = load_dataset(trn_data);
            RegressorSpec spec = RegressorSpec::defaults(parse_family(trn_family), ds.meta.model, trn_c.seed);
            trn_h.apply(spec);
            const SurrogateModel m =
                train(spec, parse_recipe(trn_recipe), ds.X, ds.Y, GridMeta::from(ds.meta), trn_c.resolved_threads());
            save_model(m, trn_out);
        } else if (*prd) {
            const SurrogateModel m = load_model(prd_model);
            const Eigen::MatrixXd X = read_designs(prd_input);
            emit(prd_out, predictions_to_csv(X, m.predict(X), m.grid()));
        } else if (*bm) {
            std::vector<Dataset> datasets;
            for (const auto& p : bm_data) datasets.push_back(load_dataset(p));
            BenchmarkOptions opt;
            opt.families.clear();
            for (const auto& f : split_list(bm_families)) opt.families.push_back(parse_family(f));
            opt.recipes.clear();
            for (const auto& r : split_list(bm_recipes)) opt.recipes.push_back(parse_recipe(r));
            for (const auto& s : split_list(bm_sizes)) {
                double v = 0.0;
                if (!parse_double(s, v) || v < 1 || v != std::floor(v))
                    throw ValidationError("benchmark: invalid size '" + s + "'");
                opt.sizes.push_back(static_cast<Eigen::Index>(v));
            }
            opt.folds = bm_cv;
            opt.holdout_fraction = bm_holdout;
            opt.seed = bm_c.seed;
            opt.threads = bm_c.resolved_threads();
            opt.adjust = [&](RegressorSpec& s) { bm_h.apply(s); };
            BenchmarkReport rep = benchmark(datasets, opt);
            rep.with_timing = !bm_omit_timing;
            write_text_file(bm_report, rep.to_json().dump(2) + "\n");
            if (!bm_csv.empty()) write_text_file(bm_csv, rep.to_csv());
            for (const auto& c : rep.cells)
                if (c.status != "ok")
                    std::cerr << "benchmark: " << c.model << "/" << c.family << "/" << c.recipe << "/n=" << c.n
                              << " " << c.status << ": " << c.message << "\n";
        } else if (*sen) {
            const Dataset ds = load_dataset(sen_data);
            SensitivityOptions opt;
            opt.forest.n_trees = sen_trees;
            opt.threads = sen_c.resolved_threads();
            const ImportanceMap map = importance_map(ds, parse_recipe(sen_recipe), sen_c.seed, opt);
            for (std::size_t k = 0; k < map.degenerate.size(); ++k)
                if (map.degenerate[k])
                    std::cerr << "sensitivity: no split at " << format_double(map.frequencies[k])
                              << " Hz; importances reported as uniform\n";
            emit(sen_out, importance_map_to_csv(map));
        }
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
