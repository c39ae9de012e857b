#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "hidim/bench.hpp"
#include "hidim/design.hpp"
#include "hidim/errors.hpp"
#include "hidim/joint_gp.hpp"
#include "hidim/screening.hpp"

namespace jointgp = hidim::jointgp;
namespace gp = hidim::gp;
using hidim::LearningSample;

namespace {

constexpr double kPi = std::numbers::pi;

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const auto n = a.size();
    auto ranks = [n](const Eigen::VectorXd& v) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::sort(idx.begin(), idx.end(),
                  [&](Eigen::Index x, Eigen::Index y) { return v(x) < v(y); });
        Eigen::VectorXd r(n);
        for (Eigen::Index pos = 0; pos < n; ++pos) r(idx[static_cast<std::size_t>(pos)]) = pos;
        return r;
    };
    const Eigen::VectorXd ra = ranks(a);
    const Eigen::VectorXd rb = ranks(b);
    const double ma = ra.mean(), mb = rb.mean();
    const double cov = ((ra.array() - ma) * (rb.array() - mb)).sum();
    const double sa = std::sqrt((ra.array() - ma).square().sum());
    const double sb = std::sqrt((rb.array() - mb).square().sum());
    return cov / (sa * sb);
}

// Spec toy: y = sin(2 pi x1) + (0.05 + 0.3 x1) sin(7 x2 + 3 x3).
LearningSample hetero_toy(std::size_t n, std::uint64_t seed) {
    const hidim::Design design = hidim::lhs_sample(3, n, seed);
    LearningSample sample;
    sample.points = design.points;
    sample.inputs = hidim::unit_inputs(3);
    sample.outputs.resize(design.points.rows());
    for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
        const double x1 = design.points(i, 0);
        sample.outputs(i) = std::sin(2.0 * kPi * x1) +
                            (0.05 + 0.3 * x1) *
                                std::sin(7.0 * design.points(i, 1) + 3.0 * design.points(i, 2));
    }
    return sample;
}

jointgp::JointFitOptions fast_options(std::uint64_t seed) {
    jointgp::JointFitOptions options;
    options.gp.seed = seed;
    options.gp.multi_starts = 3;
    options.gp.max_evaluations = 150;
    return options;
}

}  // namespace

TEST_CASE("q2") {
    Eigen::VectorXd observed(3), predicted(3);
    observed << 1.0, 2.0, 3.0;
    SUBCASE("perfect predictions") {
        CHECK(jointgp::q2(observed, observed) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("constant predictor at the mean scores zero") {
        predicted.setConstant(2.0);
        CHECK(jointgp::q2(observed, predicted) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("worse than the mean goes negative") {
        predicted << 1.0, 2.0, 5.0;
        CHECK(jointgp::q2(observed, predicted) == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("constant observations rejected") {
        CHECK_THROWS_AS(jointgp::q2(Eigen::VectorXd::Constant(3, 1.0), predicted),
                        hidim::degenerate_input);
    }
}

TEST_CASE("fit_joint") {
    SUBCASE("empty explanatory set rejected") {
        const LearningSample sample = hetero_toy(50, 1);
        CHECK_THROWS_AS(jointgp::fit_joint(sample, {}, fast_options(1)), std::invalid_argument);
    }

    SUBCASE("deterministic function of the explanatory inputs only") {
        const hidim::Design design = hidim::lhs_sample(2, 100, 3);
        LearningSample sample;
        sample.points = design.points;
        sample.inputs = hidim::unit_inputs(2);
        sample.outputs.resize(100);
        for (int i = 0; i < 100; ++i)
            sample.outputs(i) =
                std::sin(2.0 * kPi * design.points(i, 0)) + design.points(i, 1) * design.points(i, 1);

        const jointgp::JointGpModel model =
            jointgp::fit_joint(sample, {0, 1}, fast_options(3));
        CHECK(model.residual_inputs.empty());
        for (int i = 0; i < 100; ++i) {
            const double disp =
                jointgp::dispersion_value(model, sample.points.row(i).transpose());
            CHECK(disp >= model.dispersion_floor);
            CHECK(disp <= 10.0 * model.dispersion_floor);
        }
    }

    SUBCASE("recovers the dispersion profile of the heteroscedastic toy") {
        const LearningSample sample = hetero_toy(300, 5);
        const jointgp::JointGpModel model = jointgp::fit_joint(sample, {0}, fast_options(5));
        CHECK(model.residual_inputs == std::vector<std::size_t>{1, 2});

        Eigen::VectorXd predictions(sample.n()), truth(sample.n());
        for (Eigen::Index i = 0; i < sample.n(); ++i) {
            predictions(i) = jointgp::dispersion_value(model, sample.points.row(i).transpose());
            truth(i) = hidim::bench::hetero_amplitude_sq(sample.points(i, 0));
        }
        CHECK(spearman(predictions, truth) >= 0.5);
    }

    SUBCASE("four stages recorded with consistent heteroscedastic nugget") {
        const LearningSample sample = hetero_toy(120, 7);
        const jointgp::JointGpModel model = jointgp::fit_joint(sample, {0}, fast_options(7));
        REQUIRE_FALSE(model.dispersion_degenerate);
        REQUIRE(model.stage_trace.size() == 4);
        CHECK(model.stage_trace[0].stage == "Gp_m,1");
        CHECK(model.stage_trace[1].stage == "Gp_v,1");
        CHECK(model.stage_trace[2].stage == "Gp_m,2");
        CHECK(model.stage_trace[3].stage == "Gp_v,2");

        // Stage consistency: the nugget Gp_m,2 used is exactly the clamped
        // Gp_v,1 prediction vector.
        REQUIRE(model.mean_gp.kernel.heteroscedastic);
        CHECK((model.mean_gp.kernel.nugget_vector - model.hetero_nugget).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK(model.hetero_nugget.minCoeff() >= model.dispersion_floor);
        CHECK((model.stage_trace[2].nugget - model.hetero_nugget).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("joint_predict") {
    const LearningSample sample = hetero_toy(150, 9);
    const jointgp::JointGpModel model = jointgp::fit_joint(sample, {0}, fast_options(9));

    SUBCASE("mean ignores residual coordinates exactly") {
        Eigen::VectorXd q(3);
        q << 0.37, 0.2, 0.9;
        const jointgp::JointPrediction p1 = jointgp::joint_predict(model, q);
        q(1) = 0.83;
        q(2) = 0.11;
        const jointgp::JointPrediction p2 = jointgp::joint_predict(model, q);
        CHECK(p1.mean == p2.mean);
        CHECK(p1.total_variance == p2.total_variance);
    }

    SUBCASE("total variance carries the dispersion floor") {
        Eigen::VectorXd q(3);
        q << 0.5, 0.5, 0.5;
        const jointgp::JointPrediction p = jointgp::joint_predict(model, q);
        CHECK(p.total_variance >= model.dispersion_floor);
    }

    SUBCASE("dispersion grows with x1 on the heteroscedastic toy") {
        double low = 0.0, high = 0.0;
        for (int k = 0; k < 20; ++k) {
            Eigen::VectorXd q(3);
            q << 0.02 + 0.001 * k, 0.5, 0.5;
            low += jointgp::joint_predict(model, q).total_variance;
            q(0) = 0.98 - 0.001 * k;
            high += jointgp::joint_predict(model, q).total_variance;
        }
        CHECK(high > low);
    }

    SUBCASE("dimension mismatch rejected") {
        const Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(jointgp::joint_predict(model, q), std::invalid_argument);
    }
}

TEST_CASE("q2_loo") {
    SUBCASE("near-noiseless smooth model") {
        Eigen::MatrixXd pts(30, 1);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            pts(i, 0) = i / 29.0;
            y(i) = std::sin(2.0 * pts(i, 0)) + 0.5 * pts(i, 0);
        }
        LearningSample sample;
        sample.points = pts;
        sample.outputs = y;
        sample.inputs = hidim::unit_inputs(1);
        gp::FitOptions options;
        options.seed = 4;
        const gp::GpModel model = gp::fit_gp(sample, gp::NuggetSpec::estimated(), options);
        const jointgp::Q2Report report = jointgp::q2_loo(model);
        CHECK(report.q2 >= 0.99);
        CHECK(report.mode == jointgp::ValidationMode::leave_one_out);
        CHECK(report.n_eval == 30);

        // Definitional composition.
        const gp::PredictionBatch loo = gp::loo_predictions(model);
        CHECK(report.q2 == jointgp::q2(y, loo.mean));
    }
    SUBCASE("pure noise has nothing to predict") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::MatrixXd pts(60, 2);
        Eigen::VectorXd y(60);
        for (int i = 0; i < 60; ++i) {
            pts(i, 0) = unif(rng);
            pts(i, 1) = unif(rng);
            y(i) = unif(rng);
        }
        LearningSample sample;
        sample.points = pts;
        sample.outputs = y;
        sample.inputs = hidim::unit_inputs(2);
        gp::FitOptions options;
        options.seed = 8;
        const gp::GpModel model = gp::fit_gp(sample, gp::NuggetSpec::estimated(), options);
        CHECK(jointgp::q2_loo(model).q2 <= 0.1);
    }
}

TEST_CASE("sequential_build") {
    SUBCASE("single-input ordering") {
        const LearningSample sample = hetero_toy(80, 11);
        jointgp::Validation validation;  // LOO
        const jointgp::BuildTrajectory trajectory =
            jointgp::sequential_build(sample, {0}, validation, fast_options(11));
        REQUIRE(trajectory.iterations.size() == 1);
        CHECK(trajectory.selected_iteration == 0);
        CHECK_FALSE(trajectory.iterations[0].warm_start_used);
        CHECK_FALSE(trajectory.aborted);
    }

    SUBCASE("prefix inclusion and warm starts along the trajectory") {
        const LearningSample sample = hetero_toy(90, 13);
        jointgp::Validation validation;
        const jointgp::BuildTrajectory trajectory =
            jointgp::sequential_build(sample, {0, 2, 1}, validation, fast_options(13));
        REQUIRE(trajectory.iterations.size() == 3);
        CHECK(trajectory.iterations[0].included_inputs == std::vector<std::size_t>{0});
        CHECK(trajectory.iterations[1].included_inputs == std::vector<std::size_t>{0, 2});
        CHECK(trajectory.iterations[2].included_inputs == std::vector<std::size_t>{0, 2, 1});
        CHECK_FALSE(trajectory.iterations[0].warm_start_used);
        CHECK(trajectory.iterations[1].warm_start_used);
        CHECK(trajectory.iterations[2].warm_start_used);

        // The recorded selection is the argmax of the validation metric with
        // ties resolved toward fewer inputs.
        std::size_t expected = 0;
        double best = -1e300;
        for (std::size_t i = 0; i < 3; ++i) {
            const double score = trajectory.iterations[i].q2_loo;
            if (score > best) {
                best = score;
                expected = i;
            }
        }
        CHECK(trajectory.selected_iteration == expected);

        // Warm-start contract surfaces in the stage-1 fit trace.
        const auto& second = trajectory.iterations[1].model;
        bool found = false;
        for (const auto& rec : second.stage_trace)
            if (rec.stage == "Gp_m,1") found = true;
        CHECK(found);
        CHECK(second.mean_gp.fit_trace.starts[0].warm);
    }

    SUBCASE("explanatory variance accumulates on the g-function") {
        const auto& fn = hidim::bench::get_benchmark("g15");
        const hidim::Design design = hidim::lhs_sample(fn.dimension, 150, 15);
        LearningSample sample;
        sample.points = hidim::scale_points(design.points, fn.bounds);
        sample.outputs = fn.evaluate_all(sample.points);
        sample.inputs = fn.bounds;

        hidim::screening::ScreeningOptions screen_options;
        screen_options.alpha = 0.1;
        const auto report = hidim::screening::screen_inputs(sample, screen_options);
        REQUIRE(report.ordering.size() >= 4);
        const std::vector<std::size_t> ordering(report.ordering.begin(),
                                                report.ordering.begin() + 4);

        jointgp::Validation validation;  // LOO
        const jointgp::BuildTrajectory trajectory =
            jointgp::sequential_build(sample, ordering, validation, fast_options(15));
        REQUIRE(trajectory.iterations.size() == 4);
        CHECK(trajectory.iterations[3].q2_loo - trajectory.iterations[0].q2_loo >= 0.2);
    }

    SUBCASE("fit failures return a flagged partial trajectory") {
        const LearningSample sample = hetero_toy(4, 17);
        jointgp::Validation validation;
        const jointgp::BuildTrajectory trajectory =
            jointgp::sequential_build(sample, {0, 1, 2}, validation, fast_options(17));
        CHECK(trajectory.aborted);
        CHECK(trajectory.iterations.size() < 3);
        CHECK_FALSE(trajectory.abort_reason.empty());
    }

    SUBCASE("empty ordering rejected") {
        const LearningSample sample = hetero_toy(50, 19);
        jointgp::Validation validation;
        CHECK_THROWS_AS(jointgp::sequential_build(sample, {}, validation, fast_options(19)),
                        std::invalid_argument);
    }

    SUBCASE("test-sample validation populates q2_test") {
        const LearningSample learn = hetero_toy(90, 21);
        jointgp::Validation validation;
        validation.mode = jointgp::ValidationMode::test_sample;
        validation.test = hetero_toy(60, 22);
        const jointgp::BuildTrajectory trajectory =
            jointgp::sequential_build(learn, {0}, validation, fast_options(21));
        REQUIRE(trajectory.iterations.size() == 1);
        CHECK(trajectory.iterations[0].q2_test.has_value());
    }
}
