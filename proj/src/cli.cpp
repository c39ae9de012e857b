#include "hidim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hidim/bench.hpp"
#include "hidim/config.hpp"
#include "hidim/csv.hpp"
#include "hidim/design.hpp"
#include "hidim/errors.hpp"
#include "hidim/joint_gp.hpp"
#include "hidim/manifest.hpp"
#include "hidim/rng.hpp"
#include "hidim/screening.hpp"

namespace hidim::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

config::PipelineConfig effective_config(const CommonOptions& common) {
    config::PipelineConfig cfg;
    if (!common.config_path.empty()) cfg = config::load_config(common.config_path);
    if (common.seed) cfg.design.seed = *common.seed;
    return cfg;
}

std::string out_path(const CommonOptions& common, const std::string& file) {
    fs::create_directories(common.out_dir);
    return (fs::path(common.out_dir) / file).string();
}

std::string config_hash(const config::PipelineConfig& cfg) {
    return io::hash_bytes(config::canonical_dump(cfg));
}

// Learning sample from a CSV with named input columns and one output column.
struct SampleData {
    LearningSample sample;
    std::vector<std::string> input_names;
};

SampleData load_sample(const std::string& path, const std::string& output_column,
                       const std::vector<InputSpec>& config_inputs) {
    const io::NumericTable table = io::read_numeric_csv(path);
    long y_col = -1;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        if (table.columns[c] == output_column) y_col = static_cast<long>(c);
    if (y_col < 0)
        throw schema_error("'" + path + "' lacks the output column '" + output_column + "'");
    if (table.columns.size() < 2)
        throw schema_error("'" + path + "' has no input columns");

    SampleData data;
    data.sample.points.resize(table.values.rows(),
                              static_cast<Eigen::Index>(table.columns.size()) - 1);
    Eigen::Index dest = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (static_cast<long>(c) == y_col) continue;
        data.input_names.push_back(table.columns[c]);
        data.sample.points.col(dest++) = table.values.col(static_cast<Eigen::Index>(c));
    }
    data.sample.outputs = table.values.col(y_col);

    for (std::size_t k = 0; k < data.input_names.size(); ++k) {
        const std::string& name = data.input_names[k];
        const InputSpec* from_config = nullptr;
        for (const auto& spec : config_inputs)
            if (spec.name == name) from_config = &spec;
        if (from_config) {
            data.sample.inputs.push_back(*from_config);
        } else {
            // Fall back to the observed range; pad degenerate columns so the
            // spec invariant holds (screening flags them anyway).
            const auto col = data.sample.points.col(static_cast<Eigen::Index>(k));
            double lo = col.minCoeff();
            double hi = col.maxCoeff();
            if (!(lo < hi)) hi = lo + 1.0;
            data.sample.inputs.emplace_back(name, lo, hi);
        }
    }
    return data;
}

void write_inputs_fragment(const std::string& path, const std::vector<InputSpec>& inputs) {
    std::ofstream out(path);
    if (!out) throw schema_error("cannot open '" + path + "' for writing");
    out << "[inputs]\n";
    for (const auto& spec : inputs)
        out << spec.name << " = " << io::format_double(spec.lower) << ", "
            << io::format_double(spec.upper) << "\n";
    if (!out) throw schema_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// design

struct DesignOptions {
    CommonOptions common;
    std::size_t d_override = 0;
    std::optional<std::size_t> n;
    std::optional<std::size_t> budget;
};

int cmd_design(const DesignOptions& opt) {
    config::PipelineConfig cfg = effective_config(opt.common);
    std::vector<InputSpec> inputs = cfg.inputs;
    if (inputs.empty()) {
        if (opt.d_override == 0)
            throw std::invalid_argument("design: provide --d or a config with [inputs]");
        inputs = unit_inputs(opt.d_override);
    }
    if (opt.n) cfg.design.n = *opt.n;
    if (opt.budget) cfg.design.optimize_budget = *opt.budget;
    const std::size_t d = inputs.size();
    const std::size_t n = cfg.design.n == 0 ? 10 * d : cfg.design.n;

    Design design = lhs_sample(d, n, cfg.design.seed, cfg.design.centered);
    design = optimize_lhs(design, cfg.design.optimize_budget, cfg.design.seed);

    std::vector<std::string> names;
    for (const auto& spec : inputs) names.push_back(spec.name);
    const std::string scaled_path = out_path(opt.common, "design.csv");
    const std::string unit_path = out_path(opt.common, "design_unit.csv");
    io::write_numeric_csv(scaled_path, names, scale_design(design, inputs));
    io::write_numeric_csv(unit_path, names, design.points);

    std::cout << "design: d = " << d << ", n = " << n << "\n"
              << "centered-L2 discrepancy (squared): "
              << io::format_double(design.criterion_value) << "\n"
              << "maximin distance: " << io::format_double(maximin_distance(design)) << "\n";

    io::RunManifest manifest;
    manifest.command = "design";
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = {{"design", cfg.design.seed}};
    manifest.output_files = {scaled_path, unit_path};
    write_manifest(manifest, out_path(opt.common, "design_manifest.json"));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
    CommonOptions common;
    std::string name;
    std::optional<std::size_t> n;
    std::optional<std::size_t> budget;
};

int cmd_bench(const BenchOptions& opt) {
    const bench::BenchFunction& fn = bench::get_benchmark(opt.name);
    config::PipelineConfig cfg = effective_config(opt.common);
    if (opt.n) cfg.design.n = *opt.n;
    if (opt.budget) cfg.design.optimize_budget = *opt.budget;
    const std::size_t n = cfg.design.n == 0 ? 10 * fn.dimension : cfg.design.n;

    Design design = lhs_sample(fn.dimension, n, cfg.design.seed, cfg.design.centered);
    design = optimize_lhs(design, cfg.design.optimize_budget, cfg.design.seed);
    const Eigen::MatrixXd points = scale_design(design, fn.bounds);
    const Eigen::VectorXd outputs = fn.evaluate_all(points);

    Eigen::MatrixXd table(points.rows(), points.cols() + 1);
    table.leftCols(points.cols()) = points;
    table.col(points.cols()) = outputs;
    std::vector<std::string> columns;
    for (const auto& spec : fn.bounds) columns.push_back(spec.name);
    columns.push_back("y");

    const std::string sample_path = out_path(opt.common, "sample.csv");
    io::write_numeric_csv(sample_path, columns, table);
    const std::string inputs_path = out_path(opt.common, "inputs.ini");
    write_inputs_fragment(inputs_path, fn.bounds);

    std::cout << "bench " << fn.name << ": n = " << n << ", d = " << fn.dimension
              << ", sample written to " << sample_path << "\n";

    io::RunManifest manifest;
    manifest.command = "bench";
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = {{"design", cfg.design.seed}};
    manifest.output_files = {sample_path, inputs_path};
    write_manifest(manifest, out_path(opt.common, "bench_manifest.json"));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// screen

struct ScreenOptions {
    CommonOptions common;
    std::string sample_path;
    std::string output_column = "y";
    std::optional<double> alpha;
    std::optional<std::string> test;
    std::optional<std::size_t> permutations;
};

screening::TestKind parse_test_kind(const std::string& value) {
    if (value == "gamma") return screening::TestKind::asymptotic_gamma;
    if (value == "permutation") return screening::TestKind::permutation;
    throw std::invalid_argument("--test must be 'gamma' or 'permutation', got '" + value + "'");
}

int cmd_screen(const ScreenOptions& opt) {
    config::PipelineConfig cfg = effective_config(opt.common);
    if (opt.alpha) cfg.screening.alpha = *opt.alpha;
    if (opt.test) cfg.screening.test = parse_test_kind(*opt.test);
    if (opt.permutations) cfg.screening.permutations = *opt.permutations;
    config::validate(cfg);

    const SampleData data = load_sample(opt.sample_path, opt.output_column, cfg.inputs);

    screening::ScreeningOptions options;
    options.alpha = cfg.screening.alpha;
    options.test = cfg.screening.test;
    options.permutations = cfg.screening.permutations;
    options.seed = cfg.design.seed;
    const screening::ScreeningReport report = screening::screen_inputs(data.sample, options);

    std::vector<std::vector<std::string>> rows;
    for (const auto& res : report.results) {
        rows.push_back({data.input_names[res.input_index], io::format_double(res.hsic),
                        io::format_double(res.r2_hsic), io::format_double(res.p_value),
                        res.selected ? "1" : "0"});
    }
    const std::string report_path = out_path(opt.common, "screening.csv");
    io::write_csv(report_path, {"input", "hsic", "r2_hsic", "p_value", "selected"}, rows);

    std::ostringstream summary;
    summary << "screening: n = " << data.sample.n() << ", alpha = " << cfg.screening.alpha
            << ", test = "
            << (cfg.screening.test == screening::TestKind::asymptotic_gamma ? "gamma"
                                                                            : "permutation")
            << "\nselected " << report.ordering.size() << " of " << report.results.size()
            << " inputs (decreasing R2_HSIC):\n";
    for (std::size_t rank = 0; rank < report.ordering.size(); ++rank) {
        const auto& res = report.results[report.ordering[rank]];
        summary << "  " << rank + 1 << ". " << data.input_names[res.input_index]
                << "  R2_HSIC = " << res.r2_hsic << "  p = " << res.p_value << "\n";
    }
    std::cout << summary.str();
    const std::string text_path = out_path(opt.common, "screening_report.txt");
    std::ofstream text(text_path);
    if (!text) throw schema_error("cannot open '" + text_path + "' for writing");
    text << summary.str();

    io::RunManifest manifest;
    manifest.command = "screen";
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = {{"screening", cfg.design.seed}};
    manifest.input_files = {opt.sample_path};
    manifest.output_files = {report_path, text_path};
    write_manifest(manifest, out_path(opt.common, "screen_manifest.json"));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptionsCli {
    CommonOptions common;
    std::string sample_path;
    std::string screening_path;
    std::string output_column = "y";
    std::optional<std::string> validation;
    std::optional<double> test_fraction;
    std::optional<int> multi_starts;
    std::optional<int> budget;
};

std::vector<std::size_t> ordering_from_report(const io::RawTable& report,
                                              const std::vector<std::string>& input_names) {
    const long name_col = report.find_column("input");
    const long r2_col = report.find_column("r2_hsic");
    const long sel_col = report.find_column("selected");
    if (name_col < 0 || r2_col < 0 || sel_col < 0)
        throw schema_error("screening report must carry columns input, r2_hsic, selected");

    struct Entry {
        std::size_t index;
        double r2;
    };
    std::vector<Entry> selected;
    for (std::size_t r = 0; r < report.n_rows(); ++r) {
        if (report.rows[r][static_cast<std::size_t>(sel_col)] != "1") continue;
        const std::string& name = report.rows[r][static_cast<std::size_t>(name_col)];
        const auto it = std::find(input_names.begin(), input_names.end(), name);
        if (it == input_names.end())
            throw schema_error("screening report names input '" + name +
                               "' which the sample lacks");
        Entry e;
        e.index = static_cast<std::size_t>(it - input_names.begin());
        e.r2 = std::stod(report.rows[r][static_cast<std::size_t>(r2_col)]);
        selected.push_back(e);
    }
    std::sort(selected.begin(), selected.end(), [](const Entry& a, const Entry& b) {
        if (a.r2 != b.r2) return a.r2 > b.r2;
        return a.index < b.index;
    });
    std::vector<std::size_t> ordering;
    for (const auto& e : selected) ordering.push_back(e.index);
    return ordering;
}

LearningSample take_rows(const LearningSample& sample, const std::vector<Eigen::Index>& rows) {
    LearningSample out;
    out.inputs = sample.inputs;
    out.points.resize(static_cast<Eigen::Index>(rows.size()), sample.points.cols());
    out.outputs.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.points.row(static_cast<Eigen::Index>(i)) = sample.points.row(rows[i]);
        out.outputs(static_cast<Eigen::Index>(i)) = sample.outputs(rows[i]);
    }
    return out;
}

int cmd_fit(const FitOptionsCli& opt) {
    config::PipelineConfig cfg = effective_config(opt.common);
    if (opt.validation) {
        if (*opt.validation == "test") cfg.validation.mode = jointgp::ValidationMode::test_sample;
        else if (*opt.validation == "loo")
            cfg.validation.mode = jointgp::ValidationMode::leave_one_out;
        else
            throw std::invalid_argument("--validation must be 'test' or 'loo'");
    }
    if (opt.test_fraction) cfg.validation.test_fraction = *opt.test_fraction;
    if (opt.multi_starts) cfg.gp.multi_starts = *opt.multi_starts;
    if (opt.budget) cfg.gp.optimizer_budget = *opt.budget;
    config::validate(cfg);

    const SampleData data = load_sample(opt.sample_path, opt.output_column, cfg.inputs);
    const io::RawTable report = io::read_csv(opt.screening_path);
    const std::vector<std::size_t> ordering = ordering_from_report(report, data.input_names);
    if (ordering.empty())
        throw degenerate_input("fit: the screening report selects no inputs");

    // Validation split.
    jointgp::Validation validation;
    validation.mode = cfg.validation.mode;
    LearningSample learning = data.sample;
    if (cfg.validation.mode == jointgp::ValidationMode::test_sample) {
        const Eigen::Index n = data.sample.n();
        std::vector<Eigen::Index> indices(static_cast<std::size_t>(n));
        std::iota(indices.begin(), indices.end(), Eigen::Index{0});
        auto rng = make_rng(derive_seed(cfg.design.seed, /*stream=*/0x73706c69ULL));
        std::shuffle(indices.begin(), indices.end(), rng);
        auto n_test = static_cast<Eigen::Index>(
            std::llround(cfg.validation.test_fraction * static_cast<double>(n)));
        n_test = std::clamp<Eigen::Index>(n_test, 1, n - 2);
        const std::vector<Eigen::Index> test_rows(indices.begin(), indices.begin() + n_test);
        const std::vector<Eigen::Index> learn_rows(indices.begin() + n_test, indices.end());
        validation.test = take_rows(data.sample, test_rows);
        learning = take_rows(data.sample, learn_rows);
    }

    jointgp::JointFitOptions options;
    options.gp.multi_starts = cfg.gp.multi_starts;
    options.gp.max_evaluations = cfg.gp.optimizer_budget;
    options.gp.smoothness = cfg.gp.smoothness;
    options.gp.seed = cfg.design.seed;
    options.dispersion_floor_factor = cfg.gp.dispersion_floor_factor;

    const jointgp::BuildTrajectory trajectory =
        jointgp::sequential_build(learning, ordering, validation, options);

    // Trajectory CSV + console table.
    std::vector<std::vector<std::string>> rows;
    std::cout << "iteration  inputs                          Q2_test    Q2_loo\n";
    for (std::size_t i = 0; i < trajectory.iterations.size(); ++i) {
        const auto& it = trajectory.iterations[i];
        std::string included;
        for (std::size_t k : it.included_inputs) {
            if (!included.empty()) included += ';';
            included += data.input_names[k];
        }
        auto stage_ll = [&](const std::string& name) -> std::string {
            for (const auto& rec : it.model.stage_trace)
                if (rec.stage == name) return io::format_double(rec.log_likelihood);
            return "";
        };
        rows.push_back({std::to_string(i + 1), included,
                        it.q2_test ? io::format_double(*it.q2_test) : "",
                        io::format_double(it.q2_loo), stage_ll("Gp_m,1"), stage_ll("Gp_v,1"),
                        stage_ll("Gp_m,2"), stage_ll("Gp_v,2")});
        std::ostringstream line;
        line << i + 1 << "          " << included;
        std::cout << line.str() << "  "
                  << (it.q2_test ? std::to_string(*it.q2_test) : std::string("-")) << "  "
                  << it.q2_loo << (i == trajectory.selected_iteration ? "   <- selected" : "")
                  << "\n";
    }
    const std::string trajectory_path = out_path(opt.common, "trajectory.csv");
    io::write_csv(trajectory_path,
                  {"iteration", "inputs_included", "q2_test", "q2_loo", "loglik_m1", "loglik_v1",
                   "loglik_m2", "loglik_v2"},
                  rows);

    io::RunManifest manifest;
    manifest.command = "fit";
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = {{"fit", cfg.design.seed}};
    manifest.input_files = {opt.sample_path, opt.screening_path};
    manifest.output_files = {trajectory_path};

    if (trajectory.aborted && trajectory.iterations.empty()) {
        write_manifest(manifest, out_path(opt.common, "fit_manifest.json"));
        std::cerr << "fit aborted: " << trajectory.abort_reason << "\n";
        return kExitNumerical;
    }

    // Persist the selected model: two gp files, their training tables, and
    // the joint manifest.
    const jointgp::JointGpModel& best =
        trajectory.iterations[trajectory.selected_iteration].model;

    std::vector<std::string> mean_columns = data.input_names;
    mean_columns.push_back("y");
    Eigen::MatrixXd mean_table(learning.n(), learning.d() + 1);
    mean_table.leftCols(learning.d()) = learning.points;
    mean_table.col(learning.d()) = learning.outputs;
    const std::string mean_data_path = out_path(opt.common, "train_mean.csv");
    io::write_numeric_csv(mean_data_path, mean_columns, mean_table);

    std::string disp_data_path;
    if (!best.dispersion_degenerate) {
        std::vector<std::string> disp_columns = data.input_names;
        disp_columns.push_back("dispersion");
        Eigen::MatrixXd disp_table(learning.n(), learning.d() + 1);
        disp_table.leftCols(learning.d()) = learning.points;
        disp_table.col(learning.d()) = best.dispersion_gp.training_outputs;
        disp_data_path = out_path(opt.common, "train_dispersion.csv");
        io::write_numeric_csv(disp_data_path, disp_columns, disp_table);
    }

    const std::string joint_path = out_path(opt.common, "joint_model.json");
    const std::string mean_model_path = out_path(opt.common, "model_mean.json");
    const std::string disp_model_path = out_path(opt.common, "model_dispersion.json");
    jointgp::save_joint_model(best, joint_path, mean_model_path, mean_data_path, disp_model_path,
                              disp_data_path, data.input_names);

    std::cout << "selected iteration: " << trajectory.selected_iteration + 1 << " of "
              << trajectory.iterations.size() << "; model written to " << joint_path << "\n";

    manifest.output_files.push_back(mean_data_path);
    manifest.output_files.push_back(mean_model_path);
    if (!best.dispersion_degenerate) {
        manifest.output_files.push_back(disp_data_path);
        manifest.output_files.push_back(disp_model_path);
    }
    manifest.output_files.push_back(joint_path);
    write_manifest(manifest, out_path(opt.common, "fit_manifest.json"));

    if (trajectory.aborted) {
        std::cerr << "fit aborted after " << trajectory.iterations.size()
                  << " iterations: " << trajectory.abort_reason << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
    CommonOptions common;
    std::string model_path;
    std::string query_path;
};

int cmd_predict(const PredictOptions& opt) {
    const jointgp::LoadedJointModel loaded = jointgp::load_joint_model(opt.model_path);
    const io::NumericTable query = io::read_numeric_csv(opt.query_path);

    std::vector<Eigen::Index> column_of;
    std::vector<std::string> missing;
    for (const auto& name : loaded.input_names) {
        long col = -1;
        for (std::size_t c = 0; c < query.columns.size(); ++c)
            if (query.columns[c] == name) col = static_cast<long>(c);
        if (col < 0) missing.push_back(name);
        else column_of.push_back(col);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& name : missing) list += (list.empty() ? "" : ", ") + name;
        throw schema_error("query file lacks input columns: " + list);
    }
    for (const auto& name : query.columns) {
        if (std::find(loaded.input_names.begin(), loaded.input_names.end(), name) ==
            loaded.input_names.end())
            std::cerr << "warning: ignoring unknown column '" << name << "'\n";
    }

    const Eigen::Index n = query.values.rows();
    Eigen::MatrixXd points(n, static_cast<Eigen::Index>(loaded.input_names.size()));
    for (std::size_t k = 0; k < column_of.size(); ++k)
        points.col(static_cast<Eigen::Index>(k)) = query.values.col(column_of[k]);

    Eigen::MatrixXd out(n, 2);
    if (n > 0) {
        const jointgp::JointPredictionBatch batch = jointgp::joint_predict(loaded.model, points);
        out.col(0) = batch.mean;
        out.col(1) = batch.total_variance;
    }
    const std::string predictions_path = out_path(opt.common, "predictions.csv");
    io::write_numeric_csv(predictions_path, {"mean", "total_variance"}, out);
    std::cout << "predict: " << n << " rows -> " << predictions_path << "\n";

    io::RunManifest manifest;
    manifest.command = "predict";
    manifest.config_hash = "";
    manifest.input_files = {opt.model_path, opt.query_path};
    manifest.output_files = {predictions_path};
    write_manifest(manifest, out_path(opt.common, "predict_manifest.json"));
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        std::ifstream in(path);
        if (!in) throw schema_error("cannot open '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& err) {
            throw schema_error("'" + path + "' is not valid JSON: " + err.what());
        }
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    const io::RawTable table = io::read_csv(path);
    if (table.find_column("r2_hsic") >= 0) {
        std::cout << "screening report " << path << "\n";
    } else if (table.find_column("q2_loo") >= 0) {
        std::cout << "build trajectory " << path << "\n";
    } else {
        std::cout << "table " << path << "\n";
    }
    for (const auto& col : table.columns) std::cout << col << "\t";
    std::cout << "\n";
    for (const auto& row : table.rows) {
        for (const auto& cell : row) std::cout << (cell.empty() ? "-" : cell) << "\t";
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"metamodeling pipeline for computer experiments with many inputs"};
    app.require_subcommand(1);

    DesignOptions design_opt;
    auto* design_cmd = app.add_subcommand("design", "generate an optimized space-filling design");
    design_cmd->add_option("--config", design_opt.common.config_path, "configuration file");
    design_cmd->add_option("--out", design_opt.common.out_dir, "output directory");
    design_cmd->add_option("--seed", design_opt.common.seed, "design seed");
    design_cmd->add_option("--d", design_opt.d_override, "dimension (unit-cube inputs)");
    design_cmd->add_option("--n", design_opt.n, "number of points (default 10*d)");
    design_cmd->add_option("--budget", design_opt.budget, "discrepancy optimization budget");

    BenchOptions bench_opt;
    auto* bench_cmd = app.add_subcommand("bench", "evaluate an analytic benchmark on a design");
    bench_cmd->add_option("--name", bench_opt.name, "benchmark name")->required();
    bench_cmd->add_option("--config", bench_opt.common.config_path, "configuration file");
    bench_cmd->add_option("--out", bench_opt.common.out_dir, "output directory");
    bench_cmd->add_option("--seed", bench_opt.common.seed, "design seed");
    bench_cmd->add_option("--n", bench_opt.n, "number of points (default 10*d)");
    bench_cmd->add_option("--budget", bench_opt.budget, "discrepancy optimization budget");

    ScreenOptions screen_opt;
    auto* screen_cmd = app.add_subcommand("screen", "HSIC screening of a learning sample");
    screen_cmd->add_option("--sample", screen_opt.sample_path, "sample CSV")->required();
    screen_cmd->add_option("--config", screen_opt.common.config_path, "configuration file");
    screen_cmd->add_option("--out", screen_opt.common.out_dir, "output directory");
    screen_cmd->add_option("--seed", screen_opt.common.seed, "permutation seed");
    screen_cmd->add_option("--alpha", screen_opt.alpha, "test level in (0,1)");
    screen_cmd->add_option("--test", screen_opt.test, "gamma|permutation");
    screen_cmd->add_option("--permutations", screen_opt.permutations, "permutation count");
    screen_cmd->add_option("--y-col", screen_opt.output_column, "output column name");

    FitOptionsCli fit_opt;
    auto* fit_cmd = app.add_subcommand("fit", "sequential joint Gp build from a screening report");
    fit_cmd->add_option("--sample", fit_opt.sample_path, "sample CSV")->required();
    fit_cmd->add_option("--screening", fit_opt.screening_path, "screening report CSV")->required();
    fit_cmd->add_option("--config", fit_opt.common.config_path, "configuration file");
    fit_cmd->add_option("--out", fit_opt.common.out_dir, "output directory");
    fit_cmd->add_option("--seed", fit_opt.common.seed, "fit seed");
    fit_cmd->add_option("--validation", fit_opt.validation, "test|loo");
    fit_cmd->add_option("--test-fraction", fit_opt.test_fraction, "held-out fraction");
    fit_cmd->add_option("--multi-starts", fit_opt.multi_starts, "optimizer starts per stage");
    fit_cmd->add_option("--budget", fit_opt.budget, "NLL evaluations per start");
    fit_cmd->add_option("--y-col", fit_opt.output_column, "output column name");

    PredictOptions predict_opt;
    auto* predict_cmd = app.add_subcommand("predict", "predict with a saved joint model");
    predict_cmd->add_option("--model", predict_opt.model_path, "joint model manifest")->required();
    predict_cmd->add_option("--query", predict_opt.query_path, "query CSV")->required();
    predict_cmd->add_option("--out", predict_opt.common.out_dir, "output directory");

    std::string report_path;
    auto* report_cmd = app.add_subcommand("report", "pretty-print a produced artifact");
    report_cmd->add_option("path", report_path, "csv or json artifact")->required();

    std::vector<const char*> argv;
    argv.push_back("hidim");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (design_cmd->parsed()) return cmd_design(design_opt);
        if (bench_cmd->parsed()) return cmd_bench(bench_opt);
        if (screen_cmd->parsed()) return cmd_screen(screen_opt);
        if (fit_cmd->parsed()) return cmd_fit(fit_opt);
        if (predict_cmd->parsed()) return cmd_predict(predict_opt);
        if (report_cmd->parsed()) return cmd_report(report_path);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const parse_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitData;
    } catch (const schema_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitData;
    } catch (const degenerate_input& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitData;
    } catch (const ill_conditioned& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumerical;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace hidim::cli
