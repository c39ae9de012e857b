#include "hidim/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>

#include "hidim/errors.hpp"
#include "hidim/parallel.hpp"
#include "hidim/rng.hpp"

namespace hidim::screening {

namespace {

double sample_std(const Eigen::VectorXd& v) {
    const double n = static_cast<double>(v.size());
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (n - 1.0));
}

// Double centering: (H M H)_ij = M_ij - rowmean_i - colmean_j + grandmean.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& m) {
    const Eigen::VectorXd row_means = m.rowwise().mean();
    const double grand = row_means.mean();
    Eigen::MatrixXd centered = m;
    centered.colwise() -= row_means;
    centered.rowwise() -= row_means.transpose();
    centered.array() += grand;
    return centered;
}

// V-statistic from a pre-centered first argument: (1/n^2) sum Kc o L.
double hsic_from_centered(const Eigen::MatrixXd& k_centered, const Eigen::MatrixXd& l) {
    const double n = static_cast<double>(l.rows());
    return k_centered.cwiseProduct(l).sum() / (n * n);
}

double permutation_p_value(const Eigen::MatrixXd& k_centered, const Eigen::MatrixXd& l,
                           std::size_t permutations, std::uint64_t base_seed,
                           std::uint64_t stream) {
    if (permutations == 0)
        throw std::invalid_argument("hsic_permutation_test: need at least one permutation");
    const Eigen::Index n = l.rows();
    const double observed = hsic_from_centered(k_centered, l);

    std::vector<std::size_t> exceed(permutations, 0);
    parallel_for(permutations, [&](std::size_t b) {
        auto rng = make_rng(derive_seed(base_seed, stream, b));
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        double stat = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index pi = perm[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < n; ++j)
                stat += k_centered(i, j) * l(pi, perm[static_cast<std::size_t>(j)]);
        }
        stat /= static_cast<double>(n) * static_cast<double>(n);
        exceed[b] = stat >= observed ? 1 : 0;
    });
    const auto count = std::accumulate(exceed.begin(), exceed.end(), std::size_t{0});
    return static_cast<double>(1 + count) / static_cast<double>(permutations + 1);
}

GammaTestResult gamma_p_value(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
    const Eigen::Index n = k.rows();
    if (n < 6)
        throw std::invalid_argument("hsic_gamma_test: needs at least 6 observations");
    const double m = static_cast<double>(n);

    const Eigen::MatrixXd kc = center_gram(k);
    const Eigen::MatrixXd lc = center_gram(l);

    // Statistic n * HSIC_b and its moment-matched null Gamma distribution
    // (Gretton et al. kernel independence test).
    const double test_stat = kc.cwiseProduct(lc).sum() / m;

    Eigen::MatrixXd var_terms = (kc.cwiseProduct(lc) / 6.0).array().square();
    double var_hsic = (var_terms.sum() - var_terms.diagonal().sum()) / (m * (m - 1.0));
    var_hsic *= 72.0 * (m - 4.0) * (m - 5.0) / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));

    const double mu_x = (k.sum() - k.diagonal().sum()) / (m * (m - 1.0));
    const double mu_y = (l.sum() - l.diagonal().sum()) / (m * (m - 1.0));
    const double mean_hsic = (1.0 + mu_x * mu_y - mu_x - mu_y) / m;

    if (!(mean_hsic > 0.0) || !(var_hsic > 0.0))
        throw degenerate_input("hsic_gamma_test: degenerate kernels (null moments vanish)");

    const double shape = mean_hsic * mean_hsic / var_hsic;
    const double scale = var_hsic * m / mean_hsic;

    GammaTestResult result;
    result.small_sample_warning = n < 20;
    boost::math::gamma_distribution<double> null_dist(shape, scale);
    result.p_value = boost::math::cdf(boost::math::complement(null_dist, std::max(test_stat, 0.0)));
    return result;
}

}  // namespace

Eigen::MatrixXd gaussian_gram(const Eigen::VectorXd& values) {
    const Eigen::Index n = values.size();
    if (n < 2) throw std::invalid_argument("gaussian_gram: need at least 2 values");
    const double s = sample_std(values);
    if (s <= 0.0)
        throw degenerate_input("gaussian_gram: zero empirical standard deviation");
    const double inv_two_s2 = 1.0 / (2.0 * s * s);
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double diff = values(i) - values(j);
            const double k = std::exp(-diff * diff * inv_two_s2);
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }
    return gram;
}

double hsic_v_statistic(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
    if (K.rows() != K.cols() || L.rows() != L.cols() || K.rows() != L.rows())
        throw std::invalid_argument("hsic_v_statistic: Gram matrices must be square of equal size");
    return hsic_from_centered(center_gram(K), L);
}

double r2_hsic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd k = gaussian_gram(x);
    const Eigen::MatrixXd l = gaussian_gram(y);
    const Eigen::MatrixXd kc = center_gram(k);
    const Eigen::MatrixXd lc = center_gram(l);
    const double n2 = static_cast<double>(x.size()) * static_cast<double>(x.size());
    const double xy = kc.cwiseProduct(l).sum() / n2;
    const double xx = kc.cwiseProduct(k).sum() / n2;
    const double yy = lc.cwiseProduct(l).sum() / n2;
    if (xx <= 0.0 || yy <= 0.0)
        throw degenerate_input("r2_hsic: self-HSIC vanished");
    return xy / std::sqrt(xx * yy);
}

double hsic_permutation_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             std::size_t permutations, std::uint64_t seed) {
    const Eigen::MatrixXd kc = center_gram(gaussian_gram(x));
    const Eigen::MatrixXd l = gaussian_gram(y);
    return permutation_p_value(kc, l, permutations, seed, /*stream=*/0);
}

GammaTestResult hsic_gamma_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return gamma_p_value(gaussian_gram(x), gaussian_gram(y));
}

ScreeningReport screen_inputs(const LearningSample& sample, const ScreeningOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0))
        throw std::invalid_argument("screen_inputs: alpha must lie in (0, 1)");
    if (sample.n() < 2) throw std::invalid_argument("screen_inputs: need at least 2 observations");
    if (sample_std(sample.outputs) <= 0.0)
        throw degenerate_input("screen_inputs: output column is constant");

    const Eigen::MatrixXd l = gaussian_gram(sample.outputs);
    const Eigen::MatrixXd lc = center_gram(l);
    const double n2 = static_cast<double>(sample.n()) * static_cast<double>(sample.n());
    const double hsic_yy = lc.cwiseProduct(l).sum() / n2;

    const auto d = static_cast<std::size_t>(sample.d());
    ScreeningReport report;
    report.alpha = options.alpha;
    report.results.resize(d);

    parallel_for(d, [&](std::size_t k) {
        HsicResult res;
        res.input_index = k;
        res.test_kind = options.test;
        const Eigen::VectorXd column = sample.points.col(static_cast<Eigen::Index>(k));
        if (sample_std(column) <= 0.0) {
            res.degenerate = true;
            res.p_value = 1.0;
            report.results[k] = res;
            return;
        }
        const Eigen::MatrixXd gram = gaussian_gram(column);
        const Eigen::MatrixXd gram_centered = center_gram(gram);
        res.hsic = hsic_from_centered(gram_centered, l);
        const double hsic_xx = hsic_from_centered(gram_centered, gram);
        res.r2_hsic = res.hsic / std::sqrt(hsic_xx * hsic_yy);
        if (options.test == TestKind::asymptotic_gamma) {
            const GammaTestResult gamma = gamma_p_value(gram, l);
            res.p_value = gamma.p_value;
            res.small_sample_warning = gamma.small_sample_warning;
        } else {
            res.p_value = permutation_p_value(gram_centered, l, options.permutations,
                                              options.seed, /*stream=*/k + 1);
        }
        res.selected = res.p_value < options.alpha;
        report.results[k] = res;
    });

    for (const auto& res : report.results)
        if (res.selected) report.ordering.push_back(res.input_index);
    std::sort(report.ordering.begin(), report.ordering.end(), [&](std::size_t a, std::size_t b) {
        const double ra = report.results[a].r2_hsic;
        const double rb = report.results[b].r2_hsic;
        if (ra != rb) return ra > rb;
        return a < b;
    });
    return report;
}

Eigen::VectorXd dgsm_estimate(const Eigen::MatrixXd& gradients) {
    if (gradients.rows() == 0 || gradients.cols() == 0)
        throw std::invalid_argument("dgsm_estimate: empty gradient sample");
    if (!gradients.allFinite())
        throw std::invalid_argument("dgsm_estimate: gradients contain non-finite entries");
    return gradients.array().square().colwise().mean();
}

double poincare_total_sobol_bound(double nu, const InputSpec& input, double var_y) {
    if (!(var_y > 0.0))
        throw std::invalid_argument("poincare_total_sobol_bound: output variance must be positive");
    const double c = std::pow(input.width() / std::numbers::pi, 2);
    return c * nu / var_y;
}

std::vector<DgsmResult> dgsm_screen(const Eigen::MatrixXd& gradients,
                                    const std::vector<InputSpec>& inputs, double var_y) {
    if (static_cast<std::size_t>(gradients.cols()) != inputs.size())
        throw std::invalid_argument("dgsm_screen: gradient columns must match input specs");
    const Eigen::VectorXd nu = dgsm_estimate(gradients);
    std::vector<DgsmResult> results(inputs.size());
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto& r = results[k];
        r.input_index = k;
        r.nu = nu(static_cast<Eigen::Index>(k));
        r.poincare_constant = std::pow(inputs[k].width() / std::numbers::pi, 2);
        r.total_sobol_bound = poincare_total_sobol_bound(r.nu, inputs[k], var_y);
    }
    return results;
}

GradientEstimate finite_difference_gradients(
    const std::function<double(const Eigen::VectorXd&)>& model, const Eigen::MatrixXd& points,
    const std::vector<InputSpec>& inputs, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradients: h must be positive");
    if (static_cast<std::size_t>(points.cols()) != inputs.size())
        throw std::invalid_argument("finite_difference_gradients: point columns must match specs");

    GradientEstimate estimate;
    estimate.gradients.resize(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        Eigen::VectorXd x = points.row(i);
        for (Eigen::Index k = 0; k < points.cols(); ++k) {
            const auto& spec = inputs[static_cast<std::size_t>(k)];
            const double original = x(k);
            const bool room_up = original + h <= spec.upper;
            const bool room_down = original - h >= spec.lower;
            if (!room_up && !room_down)
                throw std::invalid_argument("finite_difference_gradients: step exceeds the range of " +
                                            spec.name);
            double derivative;
            if (room_up && room_down) {
                x(k) = original + h;
                const double up = model(x);
                x(k) = original - h;
                const double down = model(x);
                derivative = (up - down) / (2.0 * h);
            } else {
                x(k) = original;
                const double at = model(x);
                x(k) = room_up ? original + h : original - h;
                const double shifted = model(x);
                derivative = room_up ? (shifted - at) / h : (at - shifted) / h;
                ++estimate.one_sided_count;
            }
            x(k) = original;
            estimate.gradients(i, k) = derivative;
        }
    }
    return estimate;
}

}  // namespace hidim::screening
