#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hidim/design.hpp"
#include "hidim/input_spec.hpp"

namespace hidim::gp {

/// Matern 5/2 correlation (1 + sqrt5 h + 5 h^2/3) exp(-sqrt5 h) at scaled
/// distance h >= 0.
double matern52(double distance);
/// Matern 3/2 correlation (1 + sqrt3 h) exp(-sqrt3 h).
double matern32(double distance);

/// Anisotropic tensor-product Matern parameters plus nugget.
/// process_variance and nugget entries are in output units squared;
/// lengthscales are in scaled-input ([0,1]) units.
struct KernelConfig {
    Eigen::VectorXd lengthscales;
    double process_variance = 1.0;
    double smoothness = 2.5;  // 2.5 or 1.5
    bool heteroscedastic = false;
    double nugget_scalar = 0.0;
    Eigen::VectorXd nugget_vector;  // per training point, used when heteroscedastic

    double nugget_at(Eigen::Index i) const {
        return heteroscedastic ? nugget_vector(i) : nugget_scalar;
    }
};

/// Tensor-product correlation between two scaled points.
double kernel_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& lengthscales, double smoothness);

/// Full covariance matrix sigma^2 R + diag(nugget) over scaled points.
/// Does not factorize; use fit/predict paths for conditioning checks.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& scaled_points, const KernelConfig& kernel);

struct NllValue {
    double value = 0.0;
    bool penalized = false;  // covariance could not be factorized; value is a large penalty
};

/// Profiled Gaussian negative log-likelihood for the homoscedastic model
/// C = sigma^2 (R + tau I): the constant trend beta and sigma^2 are profiled
/// out in closed form, leaving a function of lengthscales and relative nugget
/// tau. Ill-conditioned covariances yield an optimizer-safe penalty value.
NllValue negative_log_likelihood(const Eigen::MatrixXd& scaled_points,
                                 const Eigen::VectorXd& outputs,
                                 const Eigen::VectorXd& lengthscales, double relative_nugget,
                                 double smoothness = 2.5);

/// Profiled NLL for a fixed per-point nugget: C = sigma^2 R + diag(nugget).
/// Only beta admits closed-form profiling here, so sigma^2 is an argument.
NllValue negative_log_likelihood_fixed_nugget(const Eigen::MatrixXd& scaled_points,
                                              const Eigen::VectorXd& outputs,
                                              const Eigen::VectorXd& lengthscales,
                                              double process_variance,
                                              const Eigen::VectorXd& nugget,
                                              double smoothness = 2.5);

enum class NuggetMode { homoscedastic_estimated, heteroscedastic_fixed };

struct NuggetSpec {
    NuggetMode mode = NuggetMode::homoscedastic_estimated;
    Eigen::VectorXd fixed_values;  // per-point variances, output units squared

    static NuggetSpec estimated() { return {}; }
    static NuggetSpec fixed(Eigen::VectorXd values) {
        NuggetSpec s;
        s.mode = NuggetMode::heteroscedastic_fixed;
        s.fixed_values = std::move(values);
        return s;
    }
    static NuggetSpec fixed_zero(Eigen::Index n) { return fixed(Eigen::VectorXd::Zero(n)); }
};

struct FitOptions {
    int multi_starts = 5;             // 1 warm/default start + spread random starts
    int max_evaluations = 300;        // NLL evaluations per start
    double theta_lower = 1e-3;        // lengthscale bounds, scaled-input units
    double theta_upper = 1e3;
    double smoothness = 2.5;
    double nugget_floor_rel = 1e-8;   // floor on tau = nugget / sigma^2
    std::uint64_t seed = 0;
};

/// Optional warm start. Lengthscales are in scaled-input units.
struct InitHyper {
    Eigen::VectorXd lengthscales;
    std::optional<double> relative_nugget;    // homoscedastic mode
    std::optional<double> process_variance;   // heteroscedastic mode, output units squared
};

/// One optimizer start as recorded in the fit trace, natural units.
struct FitStart {
    Eigen::VectorXd lengthscales;
    double relative_nugget = 0.0;   // homoscedastic mode
    double process_variance = 0.0;  // heteroscedastic mode (standardized scale)
    double final_nll = 0.0;
    bool warm = false;
};

struct FitTrace {
    std::vector<FitStart> starts;
    int chosen_start = -1;
    std::size_t nll_evaluations = 0;
};

/// Trained Gaussian process with constant trend. Inputs are standardized to
/// [0,1] internally; outputs and all variance-like quantities are stored in
/// original units.
struct GpModel {
    std::vector<std::size_t> active_inputs;  // indices into the full input list
    std::vector<InputSpec> input_specs;      // specs of the active inputs
    KernelConfig kernel;
    double trend = 0.0;  // constant beta
    Eigen::MatrixXd training_points;   // n x d_active, scaled to [0,1]
    Eigen::VectorXd training_outputs;  // original units
    Eigen::MatrixXd cholesky_factor;   // lower triangular L with L L^T = C
    Eigen::VectorXd alpha_weights;     // C alpha = y - beta 1
    double log_likelihood = 0.0;
    double jitter = 0.0;  // diagonal stabilizer not folded into the nugget
    FitTrace fit_trace;

    // Cached solves for prediction.
    Eigen::VectorXd cinv_one;   // C^{-1} 1
    double one_cinv_one = 0.0;  // 1^T C^{-1} 1

    Eigen::Index n() const { return training_points.rows(); }
    Eigen::Index d() const { return training_points.cols(); }
};

/// Maximum-likelihood fit on the active columns of a learning sample.
/// Multi-start simplex search over log-lengthscales (plus log relative nugget
/// when estimated, log process variance when the nugget is fixed). A supplied
/// init becomes start 0. Throws ill_conditioned when every start fails.
GpModel fit_gp(const LearningSample& sample, const std::vector<std::size_t>& active_inputs,
               const NuggetSpec& nugget, const FitOptions& options,
               const InitHyper* init = nullptr);

/// Convenience overload with all inputs active.
GpModel fit_gp(const LearningSample& sample, const NuggetSpec& nugget, const FitOptions& options,
               const InitHyper* init = nullptr);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Universal-kriging predictor at a query given in physical coordinates of
/// the active inputs. Variance includes the trend-estimation term and is
/// clamped at zero.
Prediction gp_predict(const GpModel& model, const Eigen::VectorXd& query);

struct PredictionBatch {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

PredictionBatch gp_predict(const GpModel& model, const Eigen::MatrixXd& queries);

/// Closed-form leave-one-out means and variances (virtual cross-validation;
/// trend re-estimated per fold, hyperparameters fixed).
PredictionBatch loo_predictions(const GpModel& model);

/// Serialize to a versioned JSON text file. The training data itself is not
/// embedded: the file records data_path and its content hash.
void save_model(const GpModel& model, const std::string& model_path, const std::string& data_path,
                const std::string& output_column);

/// Load a model saved by save_model, re-reading the referenced data file and
/// rebuilding the factorization. Throws schema_error when the data hash does
/// not match.
GpModel load_model(const std::string& model_path);

}  // namespace hidim::gp
