#include <filesystem>
#include <fstream>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "hidim/csv.hpp"
#include "hidim/errors.hpp"
#include "hidim/gp.hpp"
#include "hidim/joint_gp.hpp"

namespace hidim::gp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

json dump_model(const GpModel& model, const std::string& data_path_as_written,
                const std::string& data_hash, const std::string& output_column) {
    json j;
    j["format"] = "hidim-gp-model";
    j["version"] = 1;
    j["trend"] = model.trend;
    j["jitter"] = model.jitter;
    j["log_likelihood"] = model.log_likelihood;
    json kernel;
    kernel["smoothness"] = model.kernel.smoothness;
    kernel["process_variance"] = model.kernel.process_variance;
    kernel["lengthscales"] = vector_to_json(model.kernel.lengthscales);
    if (model.kernel.heteroscedastic) {
        kernel["nugget_type"] = "heteroscedastic";
        kernel["nugget_values"] = vector_to_json(model.kernel.nugget_vector);
    } else {
        kernel["nugget_type"] = "homoscedastic";
        kernel["nugget"] = model.kernel.nugget_scalar;
    }
    j["kernel"] = kernel;
    json active = json::array();
    for (std::size_t k = 0; k < model.active_inputs.size(); ++k) {
        const auto& spec = model.input_specs[k];
        active.push_back({{"index", model.active_inputs[k]},
                          {"name", spec.name},
                          {"lower", spec.lower},
                          {"upper", spec.upper}});
    }
    j["active_inputs"] = active;
    j["data"] = {{"path", data_path_as_written},
                 {"hash", data_hash},
                 {"output_column", output_column}};
    return j;
}

}  // namespace

void save_model(const GpModel& model, const std::string& model_path, const std::string& data_path,
                const std::string& output_column) {
    // Store the data path relative to the model file when possible, so the
    // pair stays relocatable.
    const fs::path model_dir = fs::path(model_path).parent_path();
    fs::path rel = fs::relative(fs::path(data_path), model_dir.empty() ? "." : model_dir);
    const std::string written = rel.empty() ? data_path : rel.string();
    const json j = dump_model(model, written, io::hash_file(data_path), output_column);
    std::ofstream out(model_path);
    if (!out) throw schema_error("cannot open '" + model_path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw schema_error("write failed for '" + model_path + "'");
}

GpModel load_model(const std::string& model_path) {
    std::ifstream in(model_path);
    if (!in) throw schema_error("cannot open '" + model_path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw schema_error("'" + model_path + "' is not valid JSON: " + err.what());
    }
    if (j.value("format", "") != "hidim-gp-model")
        throw schema_error("'" + model_path + "' is not a gp model file");
    if (j.value("version", 0) != 1)
        throw schema_error("'" + model_path + "' has unsupported version");

    const fs::path model_dir = fs::path(model_path).parent_path();
    const std::string data_rel = j["data"]["path"].get<std::string>();
    fs::path data_path = fs::path(data_rel);
    if (data_path.is_relative()) data_path = model_dir / data_path;

    const std::string expected_hash = j["data"]["hash"].get<std::string>();
    const std::string actual_hash = io::hash_file(data_path.string());
    if (actual_hash != expected_hash)
        throw schema_error("data file '" + data_path.string() + "' hash " + actual_hash +
                           " does not match the model's recorded hash " + expected_hash);

    const io::NumericTable data = io::read_numeric_csv(data_path.string());
    const std::string output_column = j["data"]["output_column"].get<std::string>();

    GpModel model;
    model.trend = j["trend"].get<double>();
    model.jitter = j.value("jitter", 0.0);
    model.log_likelihood = j.value("log_likelihood", 0.0);
    const json& kernel = j["kernel"];
    model.kernel.smoothness = kernel["smoothness"].get<double>();
    model.kernel.process_variance = kernel["process_variance"].get<double>();
    model.kernel.lengthscales = vector_from_json(kernel["lengthscales"]);
    if (kernel["nugget_type"] == "heteroscedastic") {
        model.kernel.heteroscedastic = true;
        model.kernel.nugget_vector = vector_from_json(kernel["nugget_values"]);
    } else {
        model.kernel.heteroscedastic = false;
        model.kernel.nugget_scalar = kernel["nugget"].get<double>();
    }

    // Resolve the training columns by name in the referenced table.
    std::vector<Eigen::Index> column_of;
    for (const auto& entry : j["active_inputs"]) {
        model.active_inputs.push_back(entry["index"].get<std::size_t>());
        model.input_specs.emplace_back(entry["name"].get<std::string>(),
                                       entry["lower"].get<double>(),
                                       entry["upper"].get<double>());
        long col = -1;
        for (std::size_t c = 0; c < data.columns.size(); ++c)
            if (data.columns[c] == model.input_specs.back().name) col = static_cast<long>(c);
        if (col < 0)
            throw schema_error("data file lacks input column '" +
                               model.input_specs.back().name + "'");
        column_of.push_back(col);
    }
    long y_col = -1;
    for (std::size_t c = 0; c < data.columns.size(); ++c)
        if (data.columns[c] == output_column) y_col = static_cast<long>(c);
    if (y_col < 0) throw schema_error("data file lacks output column '" + output_column + "'");

    const Eigen::Index n = data.values.rows();
    model.training_points.resize(n, static_cast<Eigen::Index>(column_of.size()));
    for (std::size_t k = 0; k < column_of.size(); ++k) {
        const auto& spec = model.input_specs[k];
        model.training_points.col(static_cast<Eigen::Index>(k)) =
            (data.values.col(column_of[k]).array() - spec.lower) / spec.width();
    }
    model.training_outputs = data.values.col(y_col);

    if (model.kernel.heteroscedastic && model.kernel.nugget_vector.size() != n)
        throw schema_error("nugget vector length does not match the data file");

    // Rebuild the factorization and weights from the stored hyperparameters.
    Eigen::MatrixXd c = covariance_matrix(model.training_points, model.kernel);
    if (model.jitter > 0.0) c.diagonal().array() += model.jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success)
        throw ill_conditioned("loaded model covariance is not positive definite");
    model.cholesky_factor = llt.matrixL();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    model.cinv_one = llt.solve(ones);
    model.one_cinv_one = model.cinv_one.sum();
    model.alpha_weights = llt.solve(model.training_outputs - model.trend * ones);
    return model;
}

}  // namespace hidim::gp

namespace hidim::jointgp {

namespace {
using nlohmann::json;
namespace fs = std::filesystem;
}  // namespace

void save_joint_model(const JointGpModel& model, const std::string& manifest_path,
                      const std::string& mean_model_path, const std::string& mean_data_path,
                      const std::string& disp_model_path, const std::string& disp_data_path,
                      const std::vector<std::string>& input_names) {
    gp::save_model(model.mean_gp, mean_model_path, mean_data_path, "y");
    if (!model.dispersion_degenerate)
        gp::save_model(model.dispersion_gp, disp_model_path, disp_data_path, "dispersion");

    const fs::path dir = fs::path(manifest_path).parent_path();
    auto relative = [&](const std::string& p) {
        fs::path rel = fs::relative(fs::path(p), dir.empty() ? "." : dir);
        return rel.empty() ? p : rel.string();
    };

    json j;
    j["format"] = "hidim-joint-model";
    j["version"] = 1;
    j["explanatory_inputs"] = model.explanatory_inputs;
    j["residual_inputs"] = model.residual_inputs;
    j["total_inputs"] = model.total_inputs;
    j["dispersion_floor"] = model.dispersion_floor;
    j["dispersion_degenerate"] = model.dispersion_degenerate;
    j["mean_model"] = relative(mean_model_path);
    if (!model.dispersion_degenerate) j["dispersion_model"] = relative(disp_model_path);
    j["input_names"] = input_names;

    std::ofstream out(manifest_path);
    if (!out) throw schema_error("cannot open '" + manifest_path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw schema_error("write failed for '" + manifest_path + "'");
}

LoadedJointModel load_joint_model(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw schema_error("cannot open '" + manifest_path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw schema_error("'" + manifest_path + "' is not valid JSON: " + err.what());
    }
    if (j.value("format", "") != "hidim-joint-model")
        throw schema_error("'" + manifest_path + "' is not a joint model manifest");
    if (j.value("version", 0) != 1)
        throw schema_error("'" + manifest_path + "' has unsupported version");

    const fs::path dir = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        if (path.is_relative()) path = dir / path;
        return path.string();
    };

    LoadedJointModel loaded;
    loaded.model.explanatory_inputs = j["explanatory_inputs"].get<std::vector<std::size_t>>();
    loaded.model.residual_inputs = j["residual_inputs"].get<std::vector<std::size_t>>();
    loaded.model.total_inputs = j["total_inputs"].get<std::size_t>();
    loaded.model.dispersion_floor = j["dispersion_floor"].get<double>();
    loaded.model.dispersion_degenerate = j["dispersion_degenerate"].get<bool>();
    loaded.model.mean_gp = gp::load_model(resolve(j["mean_model"].get<std::string>()));
    if (!loaded.model.dispersion_degenerate)
        loaded.model.dispersion_gp = gp::load_model(resolve(j["dispersion_model"].get<std::string>()));
    if (loaded.model.mean_gp.kernel.heteroscedastic)
        loaded.model.hetero_nugget = loaded.model.mean_gp.kernel.nugget_vector;
    loaded.input_names = j["input_names"].get<std::vector<std::string>>();
    return loaded;
}

}  // namespace hidim::jointgp
