#include "hidim/joint_gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "hidim/errors.hpp"

namespace hidim::jointgp {

namespace {

double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / (static_cast<double>(v.size()) - 1.0);
}

Eigen::MatrixXd slice_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& indices) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c)
        out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(indices[c]));
    return out;
}

StageRecord record_stage(const std::string& name, const gp::GpModel& model) {
    StageRecord rec;
    rec.stage = name;
    rec.log_likelihood = model.log_likelihood;
    rec.lengthscales = model.kernel.lengthscales;
    rec.process_variance = model.kernel.process_variance;
    if (model.kernel.heteroscedastic)
        rec.nugget = model.kernel.nugget_vector;
    else
        rec.nugget = Eigen::VectorXd::Constant(1, model.kernel.nugget_scalar);
    return rec;
}

double relative_nugget_of(const gp::GpModel& model) {
    return model.kernel.nugget_scalar / model.kernel.process_variance;
}

}  // namespace

JointGpModel fit_joint(const LearningSample& sample, const std::vector<std::size_t>& explanatory,
                       const JointFitOptions& options, const JointInit* init) {
    if (explanatory.empty())
        throw std::invalid_argument("fit_joint: explanatory input set is empty");
    std::set<std::size_t> unique(explanatory.begin(), explanatory.end());
    if (unique.size() != explanatory.size())
        throw std::invalid_argument("fit_joint: duplicate explanatory input index");
    for (std::size_t k : explanatory)
        if (k >= static_cast<std::size_t>(sample.d()))
            throw std::invalid_argument("fit_joint: explanatory index out of range");

    JointGpModel model;
    model.explanatory_inputs = explanatory;
    model.total_inputs = static_cast<std::size_t>(sample.d());
    for (std::size_t k = 0; k < model.total_inputs; ++k)
        if (!unique.count(k)) model.residual_inputs.push_back(k);

    const double var_y = sample_variance(sample.outputs);
    model.dispersion_floor =
        options.dispersion_floor_factor * (var_y > 0.0 ? var_y : 1.0);
    const double eps = model.dispersion_floor;

    const Eigen::MatrixXd x_exp = slice_columns(sample.points, explanatory);

    // Stage 1: homoscedastic mean model.
    gp::InitHyper stage1_init;
    const gp::InitHyper* stage1_ptr = nullptr;
    if (init && init->mean_lengthscales.size() > 0) {
        stage1_init.lengthscales = init->mean_lengthscales;
        stage1_init.relative_nugget = init->mean_relative_nugget;
        stage1_ptr = &stage1_init;
    }
    const gp::GpModel m1 = gp::fit_gp(sample, explanatory, gp::NuggetSpec::estimated(),
                                      options.gp, stage1_ptr);
    model.stage_trace.push_back(record_stage("Gp_m,1", m1));

    const Eigen::VectorXd residuals =
        sample.outputs - gp::gp_predict(m1, x_exp).mean;
    const Eigen::VectorXd squared = residuals.array().square();

    LearningSample disp_sample;
    disp_sample.points = sample.points;
    disp_sample.inputs = sample.inputs;

    bool disp_degenerate = squared.maxCoeff() <= eps || sample_variance(squared) <= 0.0;
    std::optional<gp::GpModel> v1;
    if (!disp_degenerate) {
        // Stage 2: dispersion model on squared residuals.
        disp_sample.outputs = squared;
        gp::InitHyper stage2_init;
        const gp::InitHyper* stage2_ptr = nullptr;
        if (init && init->dispersion_lengthscales.size() > 0) {
            stage2_init.lengthscales = init->dispersion_lengthscales;
            stage2_init.relative_nugget = init->dispersion_relative_nugget;
            stage2_ptr = &stage2_init;
        }
        v1 = gp::fit_gp(disp_sample, explanatory, gp::NuggetSpec::estimated(), options.gp,
                        stage2_ptr);
        model.stage_trace.push_back(record_stage("Gp_v,1", *v1));
        model.hetero_nugget = gp::gp_predict(*v1, x_exp).mean.cwiseMax(eps);
    } else {
        model.hetero_nugget = Eigen::VectorXd::Constant(sample.n(), eps);
    }

    // Stage 3: mean model refit under the fixed heteroscedastic nugget.
    gp::InitHyper stage3_init;
    stage3_init.lengthscales = m1.kernel.lengthscales;
    stage3_init.process_variance = m1.kernel.process_variance;
    const gp::GpModel m2 = gp::fit_gp(sample, explanatory,
                                      gp::NuggetSpec::fixed(model.hetero_nugget), options.gp,
                                      &stage3_init);
    model.stage_trace.push_back(record_stage("Gp_m,2", m2));
    model.mean_gp = m2;

    // Stage 4: dispersion model updated from Gp_m,2 residuals.
    if (!disp_degenerate) {
        const Eigen::VectorXd residuals2 =
            sample.outputs - gp::gp_predict(m2, x_exp).mean;
        const Eigen::VectorXd squared2 = residuals2.array().square();
        if (squared2.maxCoeff() <= eps || sample_variance(squared2) <= 0.0) {
            disp_degenerate = true;
        } else {
            disp_sample.outputs = squared2;
            gp::InitHyper stage4_init;
            stage4_init.lengthscales = v1->kernel.lengthscales;
            stage4_init.relative_nugget = relative_nugget_of(*v1);
            const gp::GpModel v2 = gp::fit_gp(disp_sample, explanatory,
                                              gp::NuggetSpec::estimated(), options.gp,
                                              &stage4_init);
            model.stage_trace.push_back(record_stage("Gp_v,2", v2));
            model.dispersion_gp = v2;
        }
    }
    model.dispersion_degenerate = disp_degenerate;
    return model;
}

namespace {

Eigen::VectorXd explanatory_coords(const JointGpModel& model, const Eigen::VectorXd& full_query) {
    if (full_query.size() != static_cast<Eigen::Index>(model.total_inputs))
        throw std::invalid_argument("joint_predict: query has " +
                                    std::to_string(full_query.size()) + " coordinates, expected " +
                                    std::to_string(model.total_inputs));
    Eigen::VectorXd coords(static_cast<Eigen::Index>(model.explanatory_inputs.size()));
    for (std::size_t k = 0; k < model.explanatory_inputs.size(); ++k)
        coords(static_cast<Eigen::Index>(k)) =
            full_query(static_cast<Eigen::Index>(model.explanatory_inputs[k]));
    return coords;
}

}  // namespace

double dispersion_value(const JointGpModel& model, const Eigen::VectorXd& full_query) {
    if (model.dispersion_degenerate) return model.dispersion_floor;
    const Eigen::VectorXd coords = explanatory_coords(model, full_query);
    return std::max(gp::gp_predict(model.dispersion_gp, coords).mean, model.dispersion_floor);
}

JointPrediction joint_predict(const JointGpModel& model, const Eigen::VectorXd& full_query) {
    const Eigen::VectorXd coords = explanatory_coords(model, full_query);
    const gp::Prediction mean_part = gp::gp_predict(model.mean_gp, coords);
    const double dispersion =
        model.dispersion_degenerate
            ? model.dispersion_floor
            : std::max(gp::gp_predict(model.dispersion_gp, coords).mean, model.dispersion_floor);
    return {mean_part.mean, mean_part.variance + dispersion};
}

JointPredictionBatch joint_predict(const JointGpModel& model, const Eigen::MatrixXd& full_queries) {
    JointPredictionBatch batch;
    batch.mean.resize(full_queries.rows());
    batch.total_variance.resize(full_queries.rows());
    for (Eigen::Index i = 0; i < full_queries.rows(); ++i) {
        const Eigen::VectorXd query = full_queries.row(i).transpose();
        const JointPrediction p = joint_predict(model, query);
        batch.mean(i) = p.mean;
        batch.total_variance(i) = p.total_variance;
    }
    return batch;
}

double q2(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted) {
    if (observed.size() != predicted.size())
        throw std::invalid_argument("q2: observed and predicted lengths differ");
    if (observed.size() < 2) throw std::invalid_argument("q2: need at least 2 observations");
    const double mean = observed.mean();
    const double sst = (observed.array() - mean).square().sum();
    if (!(sst > 0.0)) throw degenerate_input("q2: observed values are all equal");
    const double sse = (observed - predicted).squaredNorm();
    return 1.0 - sse / sst;
}

Q2Report q2_loo(const gp::GpModel& model) {
    const gp::PredictionBatch loo = gp::loo_predictions(model);
    Q2Report report;
    report.q2 = q2(model.training_outputs, loo.mean);
    report.n_eval = static_cast<std::size_t>(model.n());
    report.mode = ValidationMode::leave_one_out;
    return report;
}

Q2Report q2_loo(const JointGpModel& model) { return q2_loo(model.mean_gp); }

BuildTrajectory sequential_build(const LearningSample& sample,
                                 const std::vector<std::size_t>& ordering,
                                 const Validation& validation, const JointFitOptions& options) {
    if (ordering.empty()) throw std::invalid_argument("sequential_build: ordering is empty");
    if (validation.mode == ValidationMode::test_sample && !validation.test)
        throw std::invalid_argument("sequential_build: test-sample validation without a test sample");

    BuildTrajectory trajectory;
    JointInit warm;
    bool have_warm = false;

    for (std::size_t j = 1; j <= ordering.size(); ++j) {
        const std::vector<std::size_t> included(ordering.begin(),
                                                ordering.begin() + static_cast<long>(j));
        TrajectoryIteration iteration;
        iteration.included_inputs = included;
        iteration.warm_start_used = have_warm;
        try {
            iteration.model =
                fit_joint(sample, included, options, have_warm ? &warm : nullptr);
        } catch (const std::exception& err) {
            trajectory.aborted = true;
            trajectory.abort_reason =
                "iteration " + std::to_string(j) + ": " + err.what();
            break;
        }

        iteration.q2_loo = q2_loo(iteration.model).q2;
        if (validation.test) {
            const JointPredictionBatch predictions =
                joint_predict(iteration.model, validation.test->points);
            iteration.q2_test = q2(validation.test->outputs, predictions.mean);
        }
        trajectory.iterations.push_back(std::move(iteration));

        // Warm start for the next iteration: carried lengthscales plus a
        // geometric-mean start for the incoming input.
        auto extend = [](const Eigen::VectorXd& theta) {
            Eigen::VectorXd out(theta.size() + 1);
            out.head(theta.size()) = theta;
            out(theta.size()) = std::exp(theta.array().log().mean());
            return out;
        };
        JointInit next_warm;
        for (const auto& rec : trajectory.iterations.back().model.stage_trace) {
            if (rec.stage == "Gp_m,1") {
                next_warm.mean_lengthscales = extend(rec.lengthscales);
                next_warm.mean_relative_nugget = rec.nugget(0) / rec.process_variance;
            } else if (rec.stage == "Gp_v,1") {
                next_warm.dispersion_lengthscales = extend(rec.lengthscales);
                next_warm.dispersion_relative_nugget = rec.nugget(0) / rec.process_variance;
            }
        }
        warm = next_warm;
        have_warm = warm.mean_lengthscales.size() > 0;
    }

    if (trajectory.iterations.empty()) return trajectory;

    const bool use_test = validation.mode == ValidationMode::test_sample;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trajectory.iterations.size(); ++i) {
        const auto& it = trajectory.iterations[i];
        const double score = use_test ? it.q2_test.value() : it.q2_loo;
        if (score > best) {
            best = score;
            trajectory.selected_iteration = i;
        }
    }
    return trajectory;
}

}  // namespace hidim::jointgp
