#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hidim/design.hpp"
#include "hidim/gp.hpp"

namespace hidim::jointgp {

/// Hyperparameters of one fitted stage, original output units.
struct StageRecord {
    std::string stage;  // "Gp_m,1", "Gp_v,1", "Gp_m,2", "Gp_v,2"
    double log_likelihood = 0.0;
    Eigen::VectorXd lengthscales;
    double process_variance = 0.0;
    Eigen::VectorXd nugget;  // size 1 when homoscedastic, n when heteroscedastic
};

/// Joint metamodel: a mean component and a dispersion component, both over
/// the explanatory inputs only. The remaining inputs act as one stochastic
/// macro-parameter whose effect is carried by the dispersion component.
struct JointGpModel {
    std::vector<std::size_t> explanatory_inputs;  // ordered
    std::vector<std::size_t> residual_inputs;
    std::size_t total_inputs = 0;
    gp::GpModel mean_gp;        // Gp_m,2
    gp::GpModel dispersion_gp;  // Gp_v,2; unused when dispersion_degenerate
    bool dispersion_degenerate = false;
    double dispersion_floor = 0.0;  // epsilon
    Eigen::VectorXd hetero_nugget;  // clamp(Gp_v,1 predictions, epsilon) used by Gp_m,2
    std::vector<StageRecord> stage_trace;
};

struct JointFitOptions {
    gp::FitOptions gp;
    double dispersion_floor_factor = 1e-6;  // epsilon = factor * Var(Y_s)
};

/// Warm start for the two homoscedastic entry stages.
struct JointInit {
    Eigen::VectorXd mean_lengthscales;
    std::optional<double> mean_relative_nugget;
    Eigen::VectorXd dispersion_lengthscales;
    std::optional<double> dispersion_relative_nugget;
};

/// Four-stage joint fit:
///   1. Gp_m,1 on (X_exp, Y), homoscedastic estimated nugget;
///   2. Gp_v,1 on the squared residuals of Gp_m,1, homoscedastic;
///   3. Gp_m,2 refit with fixed per-point nugget clamp(Gp_v,1 pred, epsilon);
///   4. Gp_v,2 on the squared residuals of Gp_m,2.
/// Residuals that are all below epsilon switch the dispersion component to
/// the constant epsilon, flagged on the model.
JointGpModel fit_joint(const LearningSample& sample, const std::vector<std::size_t>& explanatory,
                       const JointFitOptions& options, const JointInit* init = nullptr);

struct JointPrediction {
    double mean = 0.0;
    double total_variance = 0.0;  // mean-model variance + clamped dispersion
};

/// Prediction at a point over all inputs; only explanatory coordinates enter.
JointPrediction joint_predict(const JointGpModel& model, const Eigen::VectorXd& full_query);

struct JointPredictionBatch {
    Eigen::VectorXd mean;
    Eigen::VectorXd total_variance;
};

JointPredictionBatch joint_predict(const JointGpModel& model, const Eigen::MatrixXd& full_queries);

/// Clamped dispersion-component prediction, always >= dispersion_floor.
double dispersion_value(const JointGpModel& model, const Eigen::VectorXd& full_query);

/// Predictivity coefficient 1 - SSE/SST. Throws degenerate_input when the
/// observed values are all equal.
double q2(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted);

enum class ValidationMode { test_sample, leave_one_out };

struct Q2Report {
    double q2 = 0.0;
    std::size_t n_eval = 0;
    ValidationMode mode = ValidationMode::leave_one_out;
};

/// Q2 of the closed-form leave-one-out means against the training outputs.
Q2Report q2_loo(const gp::GpModel& model);
/// Joint variant: mean component's closed-form LOO with the heteroscedastic
/// nugget held fixed.
Q2Report q2_loo(const JointGpModel& model);

struct Validation {
    ValidationMode mode = ValidationMode::leave_one_out;
    std::optional<LearningSample> test;
};

struct TrajectoryIteration {
    std::vector<std::size_t> included_inputs;  // prefix of the ordering
    JointGpModel model;
    std::optional<double> q2_test;
    double q2_loo = 0.0;
    bool warm_start_used = false;
};

struct BuildTrajectory {
    std::vector<TrajectoryIteration> iterations;
    std::size_t selected_iteration = 0;  // best validation Q2, ties to fewer inputs
    bool aborted = false;
    std::string abort_reason;
};

/// Sequential inclusion along the screening ordering. Iteration j fits the
/// first j inputs, warm-starting stage 1 (and the dispersion entry stage)
/// from iteration j-1; the new input's lengthscale starts at the geometric
/// mean of the carried ones. Fit failures return the partial trajectory with
/// the aborted flag set.
BuildTrajectory sequential_build(const LearningSample& sample,
                                 const std::vector<std::size_t>& ordering,
                                 const Validation& validation, const JointFitOptions& options);

/// Serialization: two linked gp model files plus a manifest holding the
/// explanatory index set and epsilon. mean_data_path/disp_data_path are CSV
/// artifacts containing the exact training tables.
void save_joint_model(const JointGpModel& model, const std::string& manifest_path,
                      const std::string& mean_model_path, const std::string& mean_data_path,
                      const std::string& disp_model_path, const std::string& disp_data_path,
                      const std::vector<std::string>& input_names);

struct LoadedJointModel {
    JointGpModel model;
    std::vector<std::string> input_names;  // full input list, in order
};

LoadedJointModel load_joint_model(const std::string& manifest_path);

}  // namespace hidim::jointgp
