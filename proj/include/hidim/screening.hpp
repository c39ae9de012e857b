#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hidim/design.hpp"
#include "hidim/input_spec.hpp"

namespace hidim::screening {

enum class TestKind { asymptotic_gamma, permutation };

/// Dependence measurement of one input against the output.
struct HsicResult {
    std::size_t input_index = 0;
    double hsic = 0.0;      // HSIC(X_k, Y), Gaussian-kernel V-statistic
    double r2_hsic = 0.0;   // normalized index in [0,1]
    double p_value = 1.0;
    TestKind test_kind = TestKind::asymptotic_gamma;
    bool selected = false;
    bool degenerate = false;            // constant column, no usable bandwidth
    bool small_sample_warning = false;  // asymptotic test below its reliable size
};

struct ScreeningReport {
    std::vector<HsicResult> results;   // one per input, in input order
    double alpha = 0.1;
    std::vector<std::size_t> ordering; // selected inputs by decreasing r2_hsic
};

struct ScreeningOptions {
    double alpha = 0.1;
    TestKind test = TestKind::asymptotic_gamma;
    std::size_t permutations = 199;
    std::uint64_t seed = 0;
};

/// Derivative-based measure for one input.
struct DgsmResult {
    std::size_t input_index = 0;
    double nu = 0.0;                 // mean squared partial derivative
    double poincare_constant = 0.0;  // ((upper-lower)/pi)^2 for a uniform input
    double total_sobol_bound = 0.0;  // poincare_constant * nu / Var(Y)
};

/// Gram matrix of the Gaussian kernel exp(-(u-v)^2 / (2 s^2)) with s the
/// sample standard deviation (unbiased) of the values. Unit diagonal.
/// Throws degenerate_input when the standard deviation is zero.
Eigen::MatrixXd gaussian_gram(const Eigen::VectorXd& values);

/// Biased V-statistic (1/n^2) tr(K H L H), H = I - (1/n) 11^T.
/// Throws std::invalid_argument on size mismatch.
double hsic_v_statistic(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L);

/// Normalized index HSIC(x,y) / sqrt(HSIC(x,x) HSIC(y,y)).
/// Throws degenerate_input when either vector is constant.
double r2_hsic(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Permutation p-value (1 + #{HSIC(x, y_pi) >= HSIC(x, y)}) / (B + 1) over B
/// seeded permutations of y. Replicate seeds are derived individually, so the
/// stream is reproducible under any execution order.
/// Throws std::invalid_argument when B = 0.
double hsic_permutation_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             std::size_t permutations, std::uint64_t seed);

struct GammaTestResult {
    double p_value = 1.0;
    bool small_sample_warning = false;  // n < 20
};

/// Asymptotic p-value from a moment-matched Gamma approximation of the null
/// distribution of n * HSIC. Requires n >= 6; warns below n = 20.
GammaTestResult hsic_gamma_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Full HSIC screen of a learning sample: one result per input, selection by
/// p < alpha, selected inputs ordered by decreasing r2_hsic (ties broken by
/// ascending input index). Constant input columns are reported degenerate and
/// unselected. Throws degenerate_input when the output column is constant.
ScreeningReport screen_inputs(const LearningSample& sample, const ScreeningOptions& options);

/// nu_k = (1/n) sum_i (dg/dx_k at point i)^2 per column.
/// Throws std::invalid_argument on non-finite entries.
Eigen::VectorXd dgsm_estimate(const Eigen::MatrixXd& gradients);

/// Poincare-constant upper bound C * nu / Var(Y) on the total Sobol index of a
/// uniform input, C = ((upper-lower)/pi)^2. Requires var_y > 0.
double poincare_total_sobol_bound(double nu, const InputSpec& input, double var_y);

/// DGSM results for all inputs of a gradient sample.
std::vector<DgsmResult> dgsm_screen(const Eigen::MatrixXd& gradients,
                                    const std::vector<InputSpec>& inputs, double var_y);

struct GradientEstimate {
    Eigen::MatrixXd gradients;      // n x d
    std::size_t one_sided_count = 0;  // entries where a bound forced a one-sided difference
};

/// Central finite differences of model at each point, step h per coordinate
/// (physical units). Points within h of a bound use a one-sided difference and
/// are counted in the flag. Requires h > 0.
GradientEstimate finite_difference_gradients(
    const std::function<double(const Eigen::VectorXd&)>& model, const Eigen::MatrixXd& points,
    const std::vector<InputSpec>& inputs, double h);

}  // namespace hidim::screening
