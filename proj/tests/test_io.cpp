#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "hidim/config.hpp"
#include "hidim/csv.hpp"
#include "hidim/design.hpp"
#include "hidim/errors.hpp"
#include "hidim/gp.hpp"
#include "hidim/joint_gp.hpp"
#include "hidim/manifest.hpp"

namespace io = hidim::io;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("csv round trip") {
    ScratchDir dir("hidim_io_csv");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(-1e6, 1e6);
    Eigen::MatrixXd values(20, 3);
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = unif(rng);
    values(0, 0) = 1.0 / 3.0;
    values(1, 1) = 1e-300;
    values(2, 2) = 12345678.901234567;

    const std::string path = dir.file("table.csv");
    io::write_numeric_csv(path, {"a", "b", "c"}, values);
    const io::NumericTable back = io::read_numeric_csv(path);
    CHECK(back.columns == std::vector<std::string>{"a", "b", "c"});
    CHECK((back.values - values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv parse errors carry line and column") {
    ScratchDir dir("hidim_io_parse");
    const std::string path = dir.file("bad.csv");
    {
        std::ofstream out(path);
        out << "a,b\n1.0,2.0\n3.0,oops\n";
    }
    try {
        io::read_numeric_csv(path);
        FAIL("expected parse_error");
    } catch (const hidim::parse_error& err) {
        CHECK(err.line() == 3);
        CHECK(err.column() == 2);
    }

    {
        std::ofstream out(path);
        out << "a,b\n1.0,2.0,3.0\n";
    }
    CHECK_THROWS_AS(io::read_csv(path), hidim::parse_error);

    {
        std::ofstream out(path);
        out << "";
    }
    CHECK_THROWS_AS(io::read_csv(path), hidim::parse_error);
    CHECK_THROWS_AS(io::read_csv(dir.file("missing.csv")), hidim::schema_error);
}

TEST_CASE("format_double is round-trip exact") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = unif(rng) * std::pow(10.0, (i % 61) - 30);
        CHECK(std::stod(io::format_double(x)) == x);
    }
}

TEST_CASE("fnv1a hash vectors") {
    CHECK(io::hash_bytes("") == "cbf29ce484222325");
    CHECK(io::hash_bytes("a") == "af63dc4c8601ec8c");
    CHECK(io::hash_bytes("foobar") == "85944171f73967e8");
}

TEST_CASE("config parsing") {
    const std::string content = R"(
# pipeline configuration
[inputs]
x1 = 0, 1
temp = -40.5, 120   # physical range

[design]
n = 120
seed = 9
optimize_budget = 500

[screening]
alpha = 0.05
test = permutation
permutations = 99

[gp]
multi_starts = 3
optimizer_budget = 111

[validation]
mode = test
test_fraction = 0.25
)";
    const auto cfg = hidim::config::parse_config(content);
    REQUIRE(cfg.inputs.size() == 2);
    CHECK(cfg.inputs[1].name == "temp");
    CHECK(cfg.inputs[1].lower == -40.5);
    CHECK(cfg.design.n == 120);
    CHECK(cfg.design.seed == 9);
    CHECK(cfg.screening.alpha == 0.05);
    CHECK(cfg.screening.test == hidim::screening::TestKind::permutation);
    CHECK(cfg.screening.permutations == 99);
    CHECK(cfg.gp.multi_starts == 3);
    CHECK(cfg.validation.mode == hidim::jointgp::ValidationMode::test_sample);
    CHECK(cfg.validation.test_fraction == 0.25);

    // Canonical dump reparses to the same canonical form.
    const std::string canon = hidim::config::canonical_dump(cfg);
    CHECK(hidim::config::canonical_dump(hidim::config::parse_config(canon)) == canon);

    SUBCASE("rejects unknown keys and bad values") {
        CHECK_THROWS_AS(hidim::config::parse_config("[design]\nwhat = 3\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(hidim::config::parse_config("[bogus]\nn = 3\n"), std::invalid_argument);
        CHECK_THROWS_AS(hidim::config::parse_config("[screening]\nalpha = 1.5\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(hidim::config::parse_config("[inputs]\nx1 = 2, 1\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(hidim::config::parse_config("n = 3\n"), std::invalid_argument);
    }
}

TEST_CASE("gp model serialization") {
    ScratchDir dir("hidim_io_model");

    const hidim::Design design = hidim::lhs_sample(2, 25, 3);
    hidim::LearningSample sample;
    sample.points = design.points;
    sample.inputs = hidim::unit_inputs(2);
    sample.outputs.resize(25);
    for (int i = 0; i < 25; ++i)
        sample.outputs(i) = std::sin(3.0 * design.points(i, 0)) + design.points(i, 1);

    hidim::gp::FitOptions options;
    options.seed = 5;
    options.multi_starts = 2;
    options.max_evaluations = 120;
    const hidim::gp::GpModel model =
        hidim::gp::fit_gp(sample, hidim::gp::NuggetSpec::estimated(), options);

    // The referenced data file holds the training table.
    Eigen::MatrixXd table(25, 3);
    table.leftCols(2) = sample.points;
    table.col(2) = sample.outputs;
    const std::string data_path = dir.file("train.csv");
    io::write_numeric_csv(data_path, {"x1", "x2", "y"}, table);

    const std::string model_path = dir.file("model.json");
    hidim::gp::save_model(model, model_path, data_path, "y");

    SUBCASE("round trip preserves the predictor") {
        const hidim::gp::GpModel loaded = hidim::gp::load_model(model_path);
        CHECK(loaded.trend == doctest::Approx(model.trend).epsilon(1e-14));
        for (double a : {0.12, 0.5, 0.83}) {
            Eigen::VectorXd q(2);
            q << a, 1.0 - a;
            const auto p0 = hidim::gp::gp_predict(model, q);
            const auto p1 = hidim::gp::gp_predict(loaded, q);
            CHECK(p1.mean == doctest::Approx(p0.mean).epsilon(1e-10));
            CHECK(p1.variance == doctest::Approx(p0.variance).epsilon(1e-8));
        }
    }
    SUBCASE("tampered data file is rejected by hash") {
        std::ofstream out(data_path, std::ios::app);
        out << "0.5,0.5,99.0\n";
        out.close();
        CHECK_THROWS_AS(hidim::gp::load_model(model_path), hidim::schema_error);
    }
    SUBCASE("missing model file") {
        CHECK_THROWS_AS(hidim::gp::load_model(dir.file("absent.json")), hidim::schema_error);
    }
}

TEST_CASE("joint model serialization") {
    ScratchDir dir("hidim_io_joint");

    const hidim::Design design = hidim::lhs_sample(3, 90, 7);
    hidim::LearningSample sample;
    sample.points = design.points;
    sample.inputs = hidim::unit_inputs(3);
    sample.outputs.resize(90);
    for (int i = 0; i < 90; ++i) {
        const double x1 = design.points(i, 0);
        sample.outputs(i) = std::sin(6.0 * x1) + (0.05 + 0.3 * x1) *
                                                     std::sin(7.0 * design.points(i, 1) +
                                                              3.0 * design.points(i, 2));
    }
    hidim::jointgp::JointFitOptions options;
    options.gp.seed = 7;
    options.gp.multi_starts = 2;
    options.gp.max_evaluations = 120;
    const hidim::jointgp::JointGpModel model = hidim::jointgp::fit_joint(sample, {0}, options);

    Eigen::MatrixXd mean_table(90, 4);
    mean_table.leftCols(3) = sample.points;
    mean_table.col(3) = sample.outputs;
    io::write_numeric_csv(dir.file("train_mean.csv"), {"x1", "x2", "x3", "y"}, mean_table);
    if (!model.dispersion_degenerate) {
        Eigen::MatrixXd disp_table(90, 4);
        disp_table.leftCols(3) = sample.points;
        disp_table.col(3) = model.dispersion_gp.training_outputs;
        io::write_numeric_csv(dir.file("train_disp.csv"), {"x1", "x2", "x3", "dispersion"},
                              disp_table);
    }

    hidim::jointgp::save_joint_model(model, dir.file("joint.json"), dir.file("mean.json"),
                                     dir.file("train_mean.csv"), dir.file("disp.json"),
                                     dir.file("train_disp.csv"), {"x1", "x2", "x3"});

    const auto loaded = hidim::jointgp::load_joint_model(dir.file("joint.json"));
    CHECK(loaded.input_names == std::vector<std::string>{"x1", "x2", "x3"});
    CHECK(loaded.model.explanatory_inputs == model.explanatory_inputs);
    CHECK(loaded.model.dispersion_floor == model.dispersion_floor);
    for (double a : {0.1, 0.4, 0.9}) {
        Eigen::VectorXd q(3);
        q << a, 0.5, 0.5;
        const auto p0 = hidim::jointgp::joint_predict(model, q);
        const auto p1 = hidim::jointgp::joint_predict(loaded.model, q);
        CHECK(p1.mean == doctest::Approx(p0.mean).epsilon(1e-10));
        CHECK(p1.total_variance == doctest::Approx(p0.total_variance).epsilon(1e-8));
    }
}

TEST_CASE("run manifest") {
    ScratchDir dir("hidim_io_manifest");
    const std::string input_path = dir.file("input.csv");
    io::write_numeric_csv(input_path, {"x"}, Eigen::MatrixXd::Constant(1, 1, 2.0));

    io::RunManifest manifest;
    manifest.command = "design";
    manifest.config_hash = io::hash_bytes("config");
    manifest.seeds = {{"design", 42}};
    manifest.input_files = {input_path};
    manifest.output_files = {dir.file("out.csv")};
    const std::string path = dir.file("manifest.json");
    io::write_manifest(manifest, path);

    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    CHECK(j["tool"] == "hidim");
    CHECK(j["command"] == "design");
    CHECK(j["seeds"]["design"] == 42);
    CHECK(j["inputs"][0]["hash"] == io::hash_file(input_path));
    CHECK(j["outputs"].size() == 1);
    CHECK(j.contains("timestamp_utc"));
}
