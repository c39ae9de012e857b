#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hidim/cli.hpp"
#include "hidim/csv.hpp"

namespace cli = hidim::cli;
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
    std::string dir(const std::string& name) const { return (path / name).string(); }
    std::string file(const std::string& a, const std::string& b) const {
        return (path / a / b).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream content;
    content << in.rdbuf();
    return content.str();
}

}  // namespace

TEST_CASE("design command") {
    ScratchDir scratch("hidim_cli_design");

    SUBCASE("n defaults to ten times the dimension") {
        REQUIRE(cli::run({"design", "--d", "27", "--budget", "50", "--out",
                          scratch.dir("a")}) == cli::kExitOk);
        const auto table = io::read_numeric_csv(scratch.file("a", "design.csv"));
        CHECK(table.values.rows() == 270);
        CHECK(table.columns.size() == 27);
        CHECK(fs::exists(scratch.file("a", "design_unit.csv")));
        CHECK(fs::exists(scratch.file("a", "design_manifest.json")));
    }
    SUBCASE("same seed gives identical bytes") {
        REQUIRE(cli::run({"design", "--d", "4", "--n", "40", "--seed", "3", "--budget", "100",
                          "--out", scratch.dir("r1")}) == cli::kExitOk);
        REQUIRE(cli::run({"design", "--d", "4", "--n", "40", "--seed", "3", "--budget", "100",
                          "--out", scratch.dir("r2")}) == cli::kExitOk);
        CHECK(slurp(scratch.file("r1", "design.csv")) == slurp(scratch.file("r2", "design.csv")));
    }
    SUBCASE("invalid sizes exit with the usage code") {
        CHECK(cli::run({"design", "--d", "3", "--n", "1", "--out", scratch.dir("bad")}) ==
              cli::kExitUsage);
        CHECK(cli::run({"design", "--out", scratch.dir("bad2")}) == cli::kExitUsage);
    }
}

TEST_CASE("bench command") {
    ScratchDir scratch("hidim_cli_bench");

    SUBCASE("g27 produces 28 columns") {
        REQUIRE(cli::run({"bench", "--name", "g27", "--n", "60", "--budget", "0", "--out",
                          scratch.dir("g")}) == cli::kExitOk);
        const auto table = io::read_numeric_csv(scratch.file("g", "sample.csv"));
        CHECK(table.columns.size() == 28);
        CHECK(table.columns.back() == "y");
        CHECK(table.values.rows() == 60);
        CHECK(fs::exists(scratch.file("g", "inputs.ini")));
    }
    SUBCASE("ishigami produces 4 columns") {
        REQUIRE(cli::run({"bench", "--name", "ishigami", "--n", "30", "--budget", "0", "--out",
                          scratch.dir("i")}) == cli::kExitOk);
        CHECK(io::read_numeric_csv(scratch.file("i", "sample.csv")).columns.size() == 4);
    }
    SUBCASE("unknown benchmark exits nonzero") {
        CHECK(cli::run({"bench", "--name", "nope", "--out", scratch.dir("x")}) ==
              cli::kExitUsage);
    }
}

TEST_CASE("screen command") {
    ScratchDir scratch("hidim_cli_screen");
    REQUIRE(cli::run({"bench", "--name", "g15", "--n", "150", "--seed", "2", "--budget", "0",
                      "--out", scratch.dir("data")}) == cli::kExitOk);

    SUBCASE("writes the five-column report") {
        REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--alpha",
                          "0.1", "--out", scratch.dir("s")}) == cli::kExitOk);
        const auto report = io::read_csv(scratch.file("s", "screening.csv"));
        CHECK(report.columns ==
              std::vector<std::string>{"input", "hsic", "r2_hsic", "p_value", "selected"});
        CHECK(report.n_rows() == 15);
        CHECK(fs::exists(scratch.file("s", "screening_report.txt")));
    }
    SUBCASE("invalid alpha is a usage error") {
        CHECK(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--alpha",
                        "1.5", "--out", scratch.dir("bad")}) == cli::kExitUsage);
    }
    SUBCASE("constant output column is a data error") {
        const auto table = io::read_numeric_csv(scratch.file("data", "sample.csv"));
        Eigen::MatrixXd zeroed = table.values;
        zeroed.col(zeroed.cols() - 1).setZero();
        const std::string degenerate = scratch.dir("deg") + std::string("/sample.csv");
        fs::create_directories(scratch.dir("deg"));
        io::write_numeric_csv(degenerate, table.columns, zeroed);
        CHECK(cli::run({"screen", "--sample", degenerate, "--out", scratch.dir("deg")}) ==
              cli::kExitData);
    }
    SUBCASE("missing sample file is a data error") {
        CHECK(cli::run({"screen", "--sample", scratch.file("data", "absent.csv"), "--out",
                        scratch.dir("m")}) == cli::kExitData);
    }
    SUBCASE("deterministic screening bytes") {
        REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--seed",
                          "5", "--out", scratch.dir("d1")}) == cli::kExitOk);
        REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--seed",
                          "5", "--out", scratch.dir("d2")}) == cli::kExitOk);
        CHECK(slurp(scratch.file("d1", "screening.csv")) ==
              slurp(scratch.file("d2", "screening.csv")));
    }
}

TEST_CASE("fit and predict commands") {
    ScratchDir scratch("hidim_cli_fit");
    REQUIRE(cli::run({"bench", "--name", "linear", "--n", "40", "--seed", "4", "--budget", "0",
                      "--out", scratch.dir("data")}) == cli::kExitOk);
    REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--out",
                      scratch.dir("scr")}) == cli::kExitOk);

    SUBCASE("loo validation fills q2_loo and leaves q2_test empty") {
        REQUIRE(cli::run({"fit", "--sample", scratch.file("data", "sample.csv"), "--screening",
                          scratch.file("scr", "screening.csv"), "--validation", "loo",
                          "--multi-starts", "2", "--budget", "120", "--out",
                          scratch.dir("fit")}) == cli::kExitOk);
        const auto trajectory = io::read_csv(scratch.file("fit", "trajectory.csv"));
        CHECK(trajectory.n_rows() >= 1);
        const long q2_test = trajectory.find_column("q2_test");
        const long q2_loo = trajectory.find_column("q2_loo");
        REQUIRE(q2_test >= 0);
        REQUIRE(q2_loo >= 0);
        for (const auto& row : trajectory.rows) {
            CHECK(row[static_cast<std::size_t>(q2_test)].empty());
            CHECK_FALSE(row[static_cast<std::size_t>(q2_loo)].empty());
        }
        CHECK(fs::exists(scratch.file("fit", "joint_model.json")));
        CHECK(fs::exists(scratch.file("fit", "model_mean.json")));
        CHECK(fs::exists(scratch.file("fit", "train_mean.csv")));

        // Prediction on the training file reproduces the outputs of this
        // near-noiseless model.
        REQUIRE(cli::run({"predict", "--model", scratch.file("fit", "joint_model.json"),
                          "--query", scratch.file("data", "sample.csv"), "--out",
                          scratch.dir("pred")}) == cli::kExitOk);
        const auto predictions = io::read_numeric_csv(scratch.file("pred", "predictions.csv"));
        const auto sample = io::read_numeric_csv(scratch.file("data", "sample.csv"));
        REQUIRE(predictions.values.rows() == sample.values.rows());
        const Eigen::VectorXd y = sample.values.col(sample.values.cols() - 1);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            CHECK(predictions.values(i, 0) == doctest::Approx(y(i)).epsilon(0.02));
    }

    SUBCASE("test validation fills q2_test") {
        REQUIRE(cli::run({"fit", "--sample", scratch.file("data", "sample.csv"), "--screening",
                          scratch.file("scr", "screening.csv"), "--validation", "test",
                          "--test-fraction", "0.25", "--multi-starts", "2", "--budget", "120",
                          "--out", scratch.dir("fit_t")}) == cli::kExitOk);
        const auto trajectory = io::read_csv(scratch.file("fit_t", "trajectory.csv"));
        const long q2_test = trajectory.find_column("q2_test");
        for (const auto& row : trajectory.rows)
            CHECK_FALSE(row[static_cast<std::size_t>(q2_test)].empty());
    }

    SUBCASE("missing screening file is a data error") {
        CHECK(cli::run({"fit", "--sample", scratch.file("data", "sample.csv"), "--screening",
                        scratch.file("scr", "absent.csv"), "--out", scratch.dir("nofit")}) ==
              cli::kExitData);
    }
}

TEST_CASE("predict edge cases") {
    ScratchDir scratch("hidim_cli_predict");
    REQUIRE(cli::run({"bench", "--name", "linear", "--n", "30", "--seed", "6", "--budget", "0",
                      "--out", scratch.dir("data")}) == cli::kExitOk);
    REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--out",
                      scratch.dir("scr")}) == cli::kExitOk);
    REQUIRE(cli::run({"fit", "--sample", scratch.file("data", "sample.csv"), "--screening",
                      scratch.file("scr", "screening.csv"), "--multi-starts", "2", "--budget",
                      "100", "--out", scratch.dir("fit")}) == cli::kExitOk);
    const std::string model = scratch.file("fit", "joint_model.json");

    SUBCASE("empty query produces an empty output with success") {
        fs::create_directories(scratch.dir("empty"));
        {
            std::ofstream out(scratch.file("empty", "query.csv"));
            out << "x1,x2\n";
        }
        REQUIRE(cli::run({"predict", "--model", model, "--query",
                          scratch.file("empty", "query.csv"), "--out", scratch.dir("empty")}) ==
                cli::kExitOk);
        const auto predictions = io::read_csv(scratch.file("empty", "predictions.csv"));
        CHECK(predictions.n_rows() == 0);
        CHECK(predictions.columns == std::vector<std::string>{"mean", "total_variance"});
    }
    SUBCASE("unknown columns are ignored, missing ones are an error") {
        fs::create_directories(scratch.dir("cols"));
        {
            std::ofstream out(scratch.file("cols", "extra.csv"));
            out << "x1,x2,junk\n0.5,0.5,7\n";
        }
        CHECK(cli::run({"predict", "--model", model, "--query",
                        scratch.file("cols", "extra.csv"), "--out", scratch.dir("cols")}) ==
              cli::kExitOk);
        {
            std::ofstream out(scratch.file("cols", "short.csv"));
            out << "x1\n0.5\n";
        }
        CHECK(cli::run({"predict", "--model", model, "--query",
                        scratch.file("cols", "short.csv"), "--out", scratch.dir("cols")}) ==
              cli::kExitData);
    }
}

TEST_CASE("report command") {
    ScratchDir scratch("hidim_cli_report");
    REQUIRE(cli::run({"bench", "--name", "linear", "--n", "30", "--budget", "0", "--out",
                      scratch.dir("data")}) == cli::kExitOk);
    REQUIRE(cli::run({"screen", "--sample", scratch.file("data", "sample.csv"), "--out",
                      scratch.dir("scr")}) == cli::kExitOk);
    CHECK(cli::run({"report", scratch.file("scr", "screening.csv")}) == cli::kExitOk);
    CHECK(cli::run({"report", scratch.file("scr", "screen_manifest.json")}) == cli::kExitOk);
    CHECK(cli::run({"report", scratch.file("scr", "absent.csv")}) == cli::kExitData);
}

TEST_CASE("binary entry point") {
    // The installed binary goes through the same code path; exercise it once
    // end to end for exit-code plumbing.
    ScratchDir scratch("hidim_cli_binary");
    const std::string exe = HIDIM_CLI_PATH;
    const std::string cmd = exe + " design --d 3 --n 20 --budget 0 --out " + scratch.dir("b") +
                            " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(scratch.file("b", "design.csv")));
    const std::string bad = exe + " bench --name nope --out " + scratch.dir("x") +
                            " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == cli::kExitUsage);
}
