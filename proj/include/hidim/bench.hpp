#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hidim/input_spec.hpp"

namespace hidim::bench {

/// Analytic test function with known sensitivity structure.
struct BenchFunction {
    std::string name;
    std::size_t dimension = 0;
    std::vector<InputSpec> bounds;
    std::function<double(const Eigen::VectorXd&)> evaluate;
    // Present only when the gradient exists in closed form everywhere we evaluate it.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::optional<Eigen::VectorXd> first_order_sobol;
    std::optional<Eigen::VectorXd> total_sobol;

    bool has_gradient() const { return static_cast<bool>(gradient); }

    Eigen::VectorXd evaluate_all(const Eigen::MatrixXd& points) const;
};

/// Sobol' g-function: prod_k (|4x_k - 2| + a_k) / (1 + a_k) on [0,1]^d.
/// Throws std::invalid_argument when any a_k < 0.
double g_function(const Eigen::VectorXd& x, const Eigen::VectorXd& a);
Eigen::VectorXd g_function_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& a);

/// First-order variance contribution of input k: V_k = (1/3)/(1+a_k)^2.
Eigen::VectorXd g_function_variance_contributions(const Eigen::VectorXd& a);
/// Analytic first-order Sobol indices V_k / (prod(1+V) - 1).
Eigen::VectorXd g_function_first_order_sobol(const Eigen::VectorXd& a);
/// Analytic total Sobol indices.
Eigen::VectorXd g_function_total_sobol(const Eigen::VectorXd& a);
/// Analytic E[(dg/dx_k)^2] over the unit cube, for DGSM oracles.
Eigen::VectorXd g_function_mean_square_gradient(const Eigen::VectorXd& a);

/// Ishigami function on [-pi, pi]^3: sin x1 + a sin^2 x2 + b x3^4 sin x1.
double ishigami(const Eigen::VectorXd& x, double a = 7.0, double b = 0.1);
Eigen::VectorXd ishigami_gradient(const Eigen::VectorXd& x, double a = 7.0, double b = 0.1);
double ishigami_variance(double a = 7.0, double b = 0.1);

/// Heteroscedastic test case on [0,1]^d, d >= 4:
///   sin(2 pi x1) + x2^2 + (0.05 + 0.3 x1) * sin(7 x3 + 3 x4).
/// With explanatory inputs {1,2}, the conditional variance over (x3,x4) is
/// (0.05 + 0.3 x1)^2 * Var[sin(7 U + 3 V)].
double hetero_testcase(const Eigen::VectorXd& x);
/// Amplitude profile (0.05 + 0.3 x1)^2; multiply by sine_variance for the
/// conditional variance.
double hetero_amplitude_sq(double x1);

/// The a-profile of the paper-shaped 27-input g-function benchmark:
/// 4 dominant, 3 moderate, 20 inert (a = 99) inputs.
Eigen::VectorXd g27_profile();

/// Named registry used by the CLI. Known names: g15, g27, ishigami, hetero, linear.
const BenchFunction& get_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

}  // namespace hidim::bench
