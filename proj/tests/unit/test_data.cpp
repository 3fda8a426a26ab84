#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "stllab/dataset.hpp"
#include "stllab/preprocess.hpp"
#include "support.hpp"

using namespace stllab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// Every one of the n equal strata of every dimension holds exactly one sample.
bool stratified(const Eigen::MatrixXd& X, const DesignSpace& space) {
    const auto n = static_cast<std::size_t>(X.rows());
    for (std::size_t d = 0; d < kDesignDims; ++d) {
        std::set<std::size_t> seen;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double u = (X(i, static_cast<Eigen::Index>(d)) - space.lower[d]) / (space.upper[d] - space.lower[d]);
            if (u < 0.0 || u >= 1.0) return false;
            seen.insert(std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n))));
        }
        if (seen.size() != n) return false;
    }
    return true;
}

Dataset small_dataset() {
    Dataset ds;
    ds.X = lhs_sample(DesignSpace::reference(), 4, 3);
    ds.Y = Eigen::MatrixXd::Random(4, 3) * 10;
    ds.meta.model = "infinite";
    ds.meta.frequencies = {100.0, 200.0, 400.0};
    ds.meta.space = DesignSpace::reference();
    return ds;
}

} // namespace

TEST_CASE("design space defaults and JSON", "[dataset]") {
    const DesignSpace t = DesignSpace::reference();
    CHECK(t.lower[1] == 60.0);
    CHECK(t.upper[3] == 2.0);
    const auto j = nlohmann::json::parse(
        R"({"rho":[2000,3000],"E_gpa":[60,150],"nu":[0.25,0.35],"eta_percent":[0.1,2.0],"h_mm":[5,7],"a":[0.3,0.6],"b":[0.3,0.6]})");
    const DesignSpace s = DesignSpace::from_json(j);
    CHECK(s.lower == t.lower);
    CHECK(s.upper == t.upper);
    CHECK(DesignSpace::from_json(t.to_json()).upper == t.upper);
    const PlateSpec mid = t.midpoint();
    CHECK(mid.rho == 2500.0);
    CHECK(mid.a == Approx(0.45));

    auto bad = j;
    bad["nu"] = {0.4, 0.3};
    CHECK_THROWS_WITH(DesignSpace::from_json(bad), ContainsSubstring("nu"));
    bad = j;
    bad["nu"] = {0.3, 0.6};
    CHECK_THROWS_AS(DesignSpace::from_json(bad), ValidationError);
    bad = j;
    bad.erase("h_mm");
    CHECK_THROWS_WITH(DesignSpace::from_json(bad), ContainsSubstring("h_mm"));
}

TEST_CASE("latin hypercube stratification", "[dataset]") {
    const DesignSpace space = DesignSpace::reference();
    for (std::size_t n : {1u, 5u, 50u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Eigen::MatrixXd X = lhs_sample(space, n, seed);
            REQUIRE(X.rows() == static_cast<Eigen::Index>(n));
            CHECK(stratified(X, space));
        }
    }
    const Eigen::MatrixXd one = lhs_sample(space, 1, 9);
    for (std::size_t d = 0; d < kDesignDims; ++d) {
        CHECK(one(0, static_cast<Eigen::Index>(d)) >= space.lower[d]);
        CHECK(one(0, static_cast<Eigen::Index>(d)) <= space.upper[d]);
    }
    CHECK(lhs_sample(space, 37, 123) == lhs_sample(space, 37, 123));
    CHECK(lhs_sample(space, 37, 123) != lhs_sample(space, 37, 124));
    CHECK_THROWS_AS(lhs_sample(space, 0, 1), ValidationError);
}

TEST_CASE("generated infinite-plate rows follow the mass law trend", "[dataset]") {
    GenerationOptions opt;
    opt.threads = 2;
    const Dataset ds = generate_dataset(StlModel::infinite, DesignSpace::reference(), 10, 5, opt);
    REQUIRE(ds.rows() == 10);
    REQUIRE(ds.outputs() == 128);
    CHECK(ds.meta.model == "infinite");
    CHECK(ds.meta.seed == 5);
    CHECK(ds.X == lhs_sample(DesignSpace::reference(), 10, 5));
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        CHECK(ds.Y(i, 0) >= 0.0);
        CHECK(ds.Y(i, 0) <= 20.0);
        CHECK(ds.Y(i, 30) > ds.Y(i, 0));
        const PlateSpec p = PlateSpec::from_design_row(ds.X.row(i));
        p.validate();
    }
    opt.bands = BandScheme::standard();
    const Dataset banded = generate_dataset(StlModel::infinite, DesignSpace::reference(), 10, 5, opt);
    CHECK(banded.outputs() == 16);
    CHECK(banded.meta.banded);
}

TEST_CASE("generation is reproducible across thread counts", "[dataset]") {
    GenerationOptions opt;
    opt.grid = FrequencyGrid::geometric(100, 2000, 12);
    opt.threads = 1;
    const Dataset a = generate_dataset(StlModel::correction, DesignSpace::reference(), 6, 77, opt);
    opt.threads = 3;
    const Dataset b = generate_dataset(StlModel::correction, DesignSpace::reference(), 6, 77, opt);
    CHECK(dataset_to_csv(a) == dataset_to_csv(b));
    CHECK(a.meta == b.meta);
}

TEST_CASE("simulation failures carry the design", "[dataset]") {
    // no mode below 1 Hz, so the modal transparency is zero
    GenerationOptions opt;
    opt.grid = FrequencyGrid({1.0});
    opt.sim.truncation = {1, 1, 1.0};
    opt.threads = 1;
    CHECK_THROWS_AS(generate_dataset(StlModel::modal, DesignSpace::reference(), 2, 1, opt), NumericError);
    CHECK_THROWS_WITH(generate_dataset(StlModel::modal, DesignSpace::reference(), 2, 1, opt),
                      ContainsSubstring("row 0") && ContainsSubstring("rho="));
}

TEST_CASE("dataset save and load round-trip", "[dataset]") {
    const test_support::TempDir dir("data");
    GenerationOptions opt;
    opt.grid = FrequencyGrid::geometric(60, 2400, 20);
    const Dataset ds = generate_dataset(StlModel::infinite, DesignSpace::reference(), 8, 11, opt);
    const std::string p1 = dir.file("a.csv");
    const std::string p2 = dir.file("b.csv");
    save_dataset(ds, p1);
    CHECK(meta_path_for(p1) == dir.file("a.meta.json"));
    const Dataset back = load_dataset(p1);
    CHECK(back.X == ds.X);
    CHECK(back.Y == ds.Y);
    CHECK(back.meta == ds.meta);
    save_dataset(back, p2);
    CHECK(read_text_file(p1) == read_text_file(p2));
    CHECK(read_text_file(meta_path_for(p1)) == read_text_file(meta_path_for(p2)));
}

TEST_CASE("malformed dataset files are rejected", "[dataset]") {
    const std::string header = "rho,E,nu,eta,h,a,b,STL@100,STL@200\n";
    const std::string good = "2500,105,0.3,1,6,0.45,0.45,20,25\n";
    CHECK_NOTHROW(dataset_from_csv(header + good, std::nullopt));
    CHECK(dataset_from_csv(header + good, std::nullopt).meta.frequencies == std::vector<double>{100, 200});
    CHECK_THROWS_WITH(dataset_from_csv(header + "2500,105,0.3,1,6,0.45,0.45,20\n", std::nullopt),
                      ContainsSubstring("line 2"));
    CHECK_THROWS_AS(dataset_from_csv(header + "2500,105,0.3,1,6,0.45,0.45,20\n", std::nullopt), ParseError);
    CHECK_THROWS_AS(dataset_from_csv("rho,E,nu,eta,h,a,c,STL@100\n" + good, std::nullopt), ParseError);
    CHECK_THROWS_AS(dataset_from_csv(header + "2500,105,0.3,1,6,0.45,0.45,x,25\n", std::nullopt), ParseError);
    CHECK_THROWS_AS(dataset_from_csv(header, std::nullopt), ParseError);

    const std::string nan_row = good + "2500,105,0.3,1,6,0.45,0.45,nan,25\n";
    CHECK_THROWS_AS(dataset_from_csv(header + nan_row, std::nullopt), ValidationError);
    CHECK_THROWS_WITH(dataset_from_csv(header + nan_row, std::nullopt),
                      ContainsSubstring("row 1") && ContainsSubstring("STL@100"));

    DatasetMeta wrong;
    wrong.frequencies = {100.0};
    CHECK_THROWS_AS(dataset_from_csv(header + good, wrong), ParseError);

    const test_support::TempDir dir("bad");
    write_text_file(dir.file("x.csv"), header + good);
    write_text_file(dir.file("x.meta.json"), "{not json");
    CHECK_THROWS_AS(load_dataset(dir.file("x.csv")), ParseError);
    CHECK_THROWS_AS(load_dataset(dir.file("missing.csv")), ValidationError);
}

TEST_CASE("dataset invariants", "[dataset]") {
    Dataset ds = small_dataset();
    CHECK_NOTHROW(ds.validate());
    CHECK(ds.head(2).rows() == 2);
    CHECK(ds.head(2).X == ds.X.topRows(2));
    CHECK_THROWS_AS(ds.head(5), ValidationError);
    const Dataset sel = ds.select({3, 1});
    CHECK(sel.Y.row(0) == ds.Y.row(3));
    ds.meta.frequencies.pop_back();
    CHECK_THROWS_AS(ds.validate(), ValidationError);
    ds = small_dataset();
    ds.Y(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH(ds.validate(), ContainsSubstring("row 2"));
}

TEST_CASE("physics-guided features", "[preprocess]") {
    Eigen::MatrixXd X(2, 7);
    X << 2500, 105, 0.3, 1.0, 6, 0.45, 0.45, 2000, 60, 0.25, 0.1, 5, 0.3, 0.3;
    const Eigen::MatrixXd base = augment(X, Recipe::base);
    CHECK(base == X);
    const Eigen::MatrixXd phys = augment(X, Recipe::physics);
    REQUIRE(phys.cols() == 9);
    CHECK(phys.leftCols(7) == X);
    CHECK(phys(0, 7) == Approx(15.0));
    CHECK(phys(0, 8) == Approx(2076.9).epsilon(1e-4));
    const Eigen::MatrixXd full = augment(X, Recipe::physics_r);
    REQUIRE(full.cols() == 10);
    CHECK(full(0, 9) == Approx(8.234e4).epsilon(1e-3));
    CHECK(full(1, 7) == Approx(10.0));

    CHECK(feature_names(Recipe::physics_r) ==
          std::vector<std::string>{"rho", "E", "nu", "eta", "h", "a", "b", "m", "D_R", "R"});
    CHECK(feature_names(Recipe::physics).size() == 9);
    CHECK(parse_recipe("physics_r") == Recipe::physics_r);
    CHECK_THROWS_AS(parse_recipe("fancy"), ValidationError);
    CHECK_THROWS_AS(augment(Eigen::MatrixXd::Ones(2, 6), Recipe::base), ValidationError);

    // row-wise: permuting rows permutes outputs
    Eigen::MatrixXd swapped = X;
    swapped.row(0).swap(swapped.row(1));
    const Eigen::MatrixXd s = augment(swapped, Recipe::physics_r);
    CHECK(s.row(0) == full.row(1));
    CHECK(s.row(1) == full.row(0));
}

TEST_CASE("scalers", "[preprocess]") {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(40, 5) * 7 + Eigen::MatrixXd::Constant(40, 5, 3);
    const Scaler st = Scaler::fit(X, ScalerKind::standardize);
    const Eigen::MatrixXd Z = st.apply(X);
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const double mean = Z.col(j).mean();
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::sqrt((Z.col(j).array() - mean).square().mean()) == Approx(1.0).margin(1e-9));
    }
    CHECK((st.invert(Z) - X).cwiseAbs().maxCoeff() < 1e-12 * X.cwiseAbs().maxCoeff());

    Eigen::MatrixXd two(2, 1);
    two << 5, 7;
    const Scaler mm = Scaler::fit(two, ScalerKind::minmax);
    CHECK(mm.apply(two)(0, 0) == 0.0);
    CHECK(mm.apply(two)(1, 0) == 1.0);
    CHECK(mm.invert(mm.apply(two)) == two);
    Eigen::MatrixXd outside(1, 1);
    outside << 9;
    CHECK(mm.apply(outside)(0, 0) == Approx(2.0));

    const Scaler mm2 = Scaler::fit(X, ScalerKind::minmax);
    CHECK((mm2.invert(mm2.apply(X)) - X).cwiseAbs().maxCoeff() < 1e-12 * X.cwiseAbs().maxCoeff());
    const Scaler back = Scaler::from_json(mm2.to_json());
    CHECK(back.apply(X) == mm2.apply(X));

    Eigen::MatrixXd constant = X;
    constant.col(2).setConstant(4.0);
    CHECK_THROWS_WITH(Scaler::fit(constant, ScalerKind::standardize, {"a", "b", "nu", "d", "e"}),
                      ContainsSubstring("'nu'"));
    CHECK_THROWS_AS(st.apply(Eigen::MatrixXd::Ones(2, 4)), ValidationError);
}
