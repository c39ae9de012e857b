#include "hidim/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "hidim/errors.hpp"
#include "hidim/optim.hpp"
#include "hidim/parallel.hpp"
#include "hidim/rng.hpp"

namespace hidim::gp {

namespace {

constexpr double kPenalty = 1e10;
constexpr double kSigma2Floor = 1e-12;
constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

double sample_std(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (static_cast<double>(v.size()) - 1.0));
}

// Per-dimension |x_i - x_j| for all pairs i > j, flattened row-major over pairs.
struct PairwiseDistances {
    Eigen::MatrixXd diffs;  // P x d
    Eigen::Index n = 0;
};

PairwiseDistances pairwise_distances(const Eigen::MatrixXd& pts) {
    PairwiseDistances pd;
    pd.n = pts.rows();
    const Eigen::Index pairs = pd.n * (pd.n - 1) / 2;
    pd.diffs.resize(pairs, pts.cols());
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < pd.n; ++i)
        for (Eigen::Index j = 0; j < i; ++j, ++p)
            pd.diffs.row(p) = (pts.row(i) - pts.row(j)).cwiseAbs();
    return pd;
}

// Tensor-product Matern correlation for one pair of scaled distance rows.
// poly and exponent factor across dimensions, so a single exp suffices.
double pair_correlation(const Eigen::RowVectorXd& abs_diff, const Eigen::VectorXd& theta,
                        double smoothness) {
    double poly = 1.0;
    double scaled_sum = 0.0;
    if (smoothness == 1.5) {
        constexpr double c = 1.7320508075688772;  // sqrt(3)
        for (Eigen::Index k = 0; k < abs_diff.size(); ++k) {
            const double h = c * abs_diff(k) / theta(k);
            poly *= 1.0 + h;
            scaled_sum += h;
        }
    } else {
        constexpr double c = 2.2360679774997896;  // sqrt(5)
        for (Eigen::Index k = 0; k < abs_diff.size(); ++k) {
            const double h = c * abs_diff(k) / theta(k);
            poly *= 1.0 + h + h * h / 3.0;
            scaled_sum += h;
        }
    }
    return poly * std::exp(-scaled_sum);
}

Eigen::MatrixXd correlation_matrix(const PairwiseDistances& pd, const Eigen::VectorXd& theta,
                                   double smoothness) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(pd.n, pd.n);
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < pd.n; ++i)
        for (Eigen::Index j = 0; j < i; ++j, ++p) {
            const double v = pair_correlation(pd.diffs.row(p), theta, smoothness);
            r(i, j) = v;
            r(j, i) = v;
        }
    return r;
}

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;  // absolute value added to the diagonal
    bool ok = false;
};

Factorization factorize_with_jitter(const Eigen::MatrixXd& c) {
    Factorization f;
    const double mean_diag = c.diagonal().mean();
    for (double level : kJitterLadder) {
        Eigen::MatrixXd candidate = c;
        const double jitter = level * std::max(mean_diag, 1e-300);
        if (jitter > 0.0) candidate.diagonal().array() += jitter;
        f.llt.compute(candidate);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = jitter;
            f.ok = true;
            return f;
        }
    }
    f.ok = false;
    return f;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

struct ProfiledFit {
    double nll = kPenalty;
    bool penalized = true;
    double beta = 0.0;
    double sigma2 = 0.0;  // profiled (homoscedastic path only)
    double jitter = 0.0;
};

// C = sigma2 (R + tau I): beta and sigma2 profiled out.
ProfiledFit profiled_nll_homoscedastic(const Eigen::MatrixXd& correlation, double tau,
                                       const Eigen::VectorXd& y) {
    ProfiledFit fit;
    const auto n = static_cast<double>(y.size());
    Eigen::MatrixXd a = correlation;
    a.diagonal().array() += tau;
    const Factorization fact = factorize_with_jitter(a);
    if (!fact.ok) return fit;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
    const Eigen::VectorXd z1 = fact.llt.solve(ones);
    const Eigen::VectorXd zy = fact.llt.solve(y);
    const double s1 = z1.sum();
    if (!(s1 > 0.0)) return fit;
    const double sy = zy.sum();
    fit.beta = sy / s1;
    const double quad = std::max(y.dot(zy) - sy * sy / s1, 0.0);
    fit.sigma2 = std::max(quad / n, kSigma2Floor);
    fit.nll = 0.5 * (n * std::log(2.0 * std::numbers::pi * fit.sigma2) +
                     log_det_from_llt(fact.llt) + n);
    fit.jitter = fact.jitter;
    fit.penalized = false;
    return fit;
}

// C = sigma2 R + diag(nugget): only beta is profiled.
ProfiledFit profiled_nll_fixed_nugget(const Eigen::MatrixXd& correlation, double sigma2,
                                      const Eigen::VectorXd& nugget, const Eigen::VectorXd& y) {
    ProfiledFit fit;
    const auto n = static_cast<double>(y.size());
    Eigen::MatrixXd c = sigma2 * correlation;
    c.diagonal() += nugget;
    const Factorization fact = factorize_with_jitter(c);
    if (!fact.ok) return fit;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
    const Eigen::VectorXd z1 = fact.llt.solve(ones);
    const Eigen::VectorXd zy = fact.llt.solve(y);
    const double s1 = z1.sum();
    if (!(s1 > 0.0)) return fit;
    const double sy = zy.sum();
    fit.beta = sy / s1;
    const double quad = std::max(y.dot(zy) - sy * sy / s1, 0.0);
    fit.sigma2 = sigma2;
    fit.nll = 0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det_from_llt(fact.llt) + quad);
    fit.jitter = fact.jitter;
    fit.penalized = false;
    return fit;
}

}  // namespace

double matern52(double distance) {
    if (distance < 0.0) throw std::invalid_argument("matern52: distance must be nonnegative");
    const double h = 2.2360679774997896 * distance;  // sqrt(5) * d
    return (1.0 + h + h * h / 3.0) * std::exp(-h);
}

double matern32(double distance) {
    if (distance < 0.0) throw std::invalid_argument("matern32: distance must be nonnegative");
    const double h = 1.7320508075688772 * distance;  // sqrt(3) * d
    return (1.0 + h) * std::exp(-h);
}

double kernel_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& lengthscales, double smoothness) {
    if (a.size() != b.size() || a.size() != lengthscales.size())
        throw std::invalid_argument("kernel_correlation: dimension mismatch");
    const Eigen::RowVectorXd diff = (a - b).cwiseAbs().transpose();
    return pair_correlation(diff, lengthscales, smoothness);
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& scaled_points,
                                  const KernelConfig& kernel) {
    if (scaled_points.cols() != kernel.lengthscales.size())
        throw std::invalid_argument("covariance_matrix: points and lengthscales disagree");
    if (kernel.heteroscedastic && kernel.nugget_vector.size() != scaled_points.rows())
        throw std::invalid_argument("covariance_matrix: nugget vector length must equal n");
    const PairwiseDistances pd = pairwise_distances(scaled_points);
    Eigen::MatrixXd c =
        kernel.process_variance * correlation_matrix(pd, kernel.lengthscales, kernel.smoothness);
    for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, i) += kernel.nugget_at(i);
    return c;
}

NllValue negative_log_likelihood(const Eigen::MatrixXd& scaled_points,
                                 const Eigen::VectorXd& outputs,
                                 const Eigen::VectorXd& lengthscales, double relative_nugget,
                                 double smoothness) {
    const PairwiseDistances pd = pairwise_distances(scaled_points);
    const Eigen::MatrixXd r = correlation_matrix(pd, lengthscales, smoothness);
    const ProfiledFit fit = profiled_nll_homoscedastic(r, relative_nugget, outputs);
    return {fit.nll, fit.penalized};
}

NllValue negative_log_likelihood_fixed_nugget(const Eigen::MatrixXd& scaled_points,
                                              const Eigen::VectorXd& outputs,
                                              const Eigen::VectorXd& lengthscales,
                                              double process_variance,
                                              const Eigen::VectorXd& nugget, double smoothness) {
    const PairwiseDistances pd = pairwise_distances(scaled_points);
    const Eigen::MatrixXd r = correlation_matrix(pd, lengthscales, smoothness);
    const ProfiledFit fit = profiled_nll_fixed_nugget(r, process_variance, nugget, outputs);
    return {fit.nll, fit.penalized};
}

GpModel fit_gp(const LearningSample& sample, const NuggetSpec& nugget, const FitOptions& options,
               const InitHyper* init) {
    std::vector<std::size_t> all(static_cast<std::size_t>(sample.d()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit_gp(sample, all, nugget, options, init);
}

GpModel fit_gp(const LearningSample& sample, const std::vector<std::size_t>& active_inputs,
               const NuggetSpec& nugget, const FitOptions& options, const InitHyper* init) {
    const Eigen::Index n = sample.n();
    const auto d_active = static_cast<Eigen::Index>(active_inputs.size());
    if (d_active == 0) throw std::invalid_argument("fit_gp: active input set is empty");
    for (std::size_t k : active_inputs)
        if (k >= static_cast<std::size_t>(sample.d()))
            throw std::invalid_argument("fit_gp: active input index out of range");
    if (n < d_active + 2)
        throw std::invalid_argument("fit_gp: need at least " + std::to_string(d_active + 2) +
                                    " observations for " + std::to_string(d_active) + " inputs");
    const bool hetero = nugget.mode == NuggetMode::heteroscedastic_fixed;
    if (hetero) {
        if (nugget.fixed_values.size() != n)
            throw std::invalid_argument("fit_gp: fixed nugget vector length must equal n");
        if ((nugget.fixed_values.array() < 0.0).any())
            throw std::invalid_argument("fit_gp: nugget entries must be nonnegative");
    }

    // Slice active columns and standardize.
    std::vector<InputSpec> specs;
    specs.reserve(active_inputs.size());
    Eigen::MatrixXd scaled(n, d_active);
    for (Eigen::Index c = 0; c < d_active; ++c) {
        const auto& spec = sample.inputs[active_inputs[static_cast<std::size_t>(c)]];
        specs.push_back(spec);
        scaled.col(c) =
            (sample.points.col(static_cast<Eigen::Index>(active_inputs[static_cast<std::size_t>(c)]))
                 .array() -
             spec.lower) /
            spec.width();
    }
    const double y_mean = sample.outputs.mean();
    double y_scale = sample_std(sample.outputs);
    if (!(y_scale > 0.0)) y_scale = 1.0;
    const Eigen::VectorXd y_std = (sample.outputs.array() - y_mean) / y_scale;
    const Eigen::VectorXd nugget_std =
        hetero ? Eigen::VectorXd(nugget.fixed_values / (y_scale * y_scale)) : Eigen::VectorXd();

    const PairwiseDistances pd = pairwise_distances(scaled);

    // Duplicated points are a hard rank deficiency unless a nugget separates
    // them; jitter must not paper over that.
    if (hetero) {
        Eigen::Index p = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < i; ++j, ++p) {
                if (pd.diffs.row(p).maxCoeff() == 0.0 &&
                    nugget.fixed_values(i) + nugget.fixed_values(j) == 0.0)
                    throw ill_conditioned(
                        "fit_gp: training points " + std::to_string(j) + " and " +
                        std::to_string(i) + " coincide with zero nugget (singular covariance)");
            }
    }

    // Optimizer parameterization: log lengthscales, then log tau (estimated
    // nugget) or log sigma2 (fixed nugget).
    const Eigen::Index n_vars = d_active + 1;
    const double log_th_lo = std::log(options.theta_lower);
    const double log_th_hi = std::log(options.theta_upper);
    const double log_tail_lo = hetero ? std::log(1e-8) : std::log(options.nugget_floor_rel);
    const double log_tail_hi = hetero ? std::log(1e4) : std::log(10.0);

    auto clamp_params = [&](Eigen::VectorXd p) {
        for (Eigen::Index i = 0; i < d_active; ++i)
            p(i) = std::clamp(p(i), log_th_lo, log_th_hi);
        p(d_active) = std::clamp(p(d_active), log_tail_lo, log_tail_hi);
        return p;
    };
    auto objective = [&](const Eigen::VectorXd& raw) {
        const Eigen::VectorXd p = clamp_params(raw);
        const Eigen::VectorXd theta = p.head(d_active).array().exp();
        const Eigen::MatrixXd r = correlation_matrix(pd, theta, options.smoothness);
        const ProfiledFit fit =
            hetero ? profiled_nll_fixed_nugget(r, std::exp(p(d_active)), nugget_std, y_std)
                   : profiled_nll_homoscedastic(r, std::exp(p(d_active)), y_std);
        return fit.nll;
    };

    // Start list: warm/default start first, then spread random starts.
    const double scale_ref = std::sqrt(static_cast<double>(d_active));
    std::vector<Eigen::VectorXd> starts;  // log-space
    FitTrace trace;
    {
        Eigen::VectorXd theta0;
        double tail0;
        if (init && init->lengthscales.size() > 0) {
            if (init->lengthscales.size() != d_active)
                throw std::invalid_argument("fit_gp: init lengthscales have wrong dimension");
            theta0 = init->lengthscales;
            if (hetero)
                tail0 = init->process_variance ? *init->process_variance / (y_scale * y_scale)
                                               : 1.0;
            else
                tail0 = init->relative_nugget.value_or(1e-4);
        } else {
            theta0 = Eigen::VectorXd::Constant(d_active, 0.5 * scale_ref);
            tail0 = hetero ? 1.0 : 1e-4;
        }
        Eigen::VectorXd p0(n_vars);
        p0.head(d_active) = theta0.array().log();
        p0(d_active) = std::log(tail0);
        starts.push_back(clamp_params(p0));
        FitStart record;
        record.lengthscales = theta0;
        if (hetero)
            record.process_variance = tail0;
        else
            record.relative_nugget = tail0;
        record.warm = init != nullptr && init->lengthscales.size() > 0;
        trace.starts.push_back(record);
    }
    const int extra = std::max(options.multi_starts - 1, 0);
    if (extra > 0) {
        // Maximin-spread random starts: oversample a seeded LHS in the start
        // box, then greedily keep the most separated rows.
        const int pool_size = std::max(4 * extra, extra + 1);
        const Design pool = lhs_sample(static_cast<std::size_t>(n_vars),
                                       static_cast<std::size_t>(pool_size),
                                       derive_seed(options.seed, /*stream=*/0x677073ULL));
        std::vector<Eigen::Index> chosen{0};
        while (static_cast<int>(chosen.size()) < extra) {
            Eigen::Index best_row = -1;
            double best_sep = -1.0;
            for (Eigen::Index r = 0; r < pool.points.rows(); ++r) {
                if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) continue;
                double sep = std::numeric_limits<double>::infinity();
                for (Eigen::Index c : chosen)
                    sep = std::min(sep, (pool.points.row(r) - pool.points.row(c)).norm());
                if (sep > best_sep) {
                    best_sep = sep;
                    best_row = r;
                }
            }
            chosen.push_back(best_row);
        }
        const double th_lo = std::log(0.1 * scale_ref);
        const double th_hi = std::log(3.0 * scale_ref);
        const double tail_lo = hetero ? std::log(0.05) : std::log(1e-7);
        const double tail_hi = hetero ? std::log(4.0) : std::log(1e-2);
        for (Eigen::Index r : chosen) {
            Eigen::VectorXd p(n_vars);
            for (Eigen::Index k = 0; k < d_active; ++k)
                p(k) = th_lo + pool.points(r, k) * (th_hi - th_lo);
            p(d_active) = tail_lo + pool.points(r, d_active) * (tail_hi - tail_lo);
            p = clamp_params(p);
            starts.push_back(p);
            FitStart record;
            record.lengthscales = p.head(d_active).array().exp();
            if (hetero)
                record.process_variance = std::exp(p(d_active));
            else
                record.relative_nugget = std::exp(p(d_active));
            trace.starts.push_back(record);
        }
    }

    std::vector<optim::NelderMeadResult> runs(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
        runs[s] = optim::nelder_mead(objective, starts[s], /*initial_step=*/0.7,
                                     static_cast<std::size_t>(options.max_evaluations));
    });

    std::size_t best = 0;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        trace.starts[s].final_nll = runs[s].best_value;
        trace.nll_evaluations += runs[s].evaluations;
        if (runs[s].best_value < runs[best].best_value) best = s;
    }
    if (!(runs[best].best_value < kPenalty / 2.0))
        throw ill_conditioned("fit_gp: covariance ill-conditioned at every optimizer start");
    trace.chosen_start = static_cast<int>(best);

    // Final assembly at the optimum, in original output units.
    const Eigen::VectorXd p_opt = clamp_params(runs[best].best_point);
    const Eigen::VectorXd theta = p_opt.head(d_active).array().exp();
    const Eigen::MatrixXd r = correlation_matrix(pd, theta, options.smoothness);

    GpModel model;
    model.active_inputs = active_inputs;
    model.input_specs = std::move(specs);
    model.training_points = std::move(scaled);
    model.training_outputs = sample.outputs;
    model.fit_trace = std::move(trace);
    model.kernel.lengthscales = theta;
    model.kernel.smoothness = options.smoothness;

    Eigen::MatrixXd c;
    if (hetero) {
        const double sigma2 = std::exp(p_opt(d_active)) * y_scale * y_scale;
        model.kernel.process_variance = sigma2;
        model.kernel.heteroscedastic = true;
        model.kernel.nugget_vector = nugget.fixed_values;
        c = sigma2 * r;
        c.diagonal() += nugget.fixed_values;
    } else {
        const double tau = std::exp(p_opt(d_active));
        const ProfiledFit fit = profiled_nll_homoscedastic(r, tau, y_std);
        if (fit.penalized) throw ill_conditioned("fit_gp: optimum not factorizable");
        const double sigma2 = fit.sigma2 * y_scale * y_scale;
        model.kernel.process_variance = sigma2;
        model.kernel.heteroscedastic = false;
        model.kernel.nugget_scalar = tau * sigma2;
        c = sigma2 * r;
        c.diagonal().array() += model.kernel.nugget_scalar;
    }

    Factorization fact = factorize_with_jitter(c);
    if (!fact.ok) throw ill_conditioned("fit_gp: final covariance not factorizable");
    if (!model.kernel.heteroscedastic && fact.jitter > 0.0) {
        // Fold the jitter into the estimated nugget so the stored kernel
        // reproduces the factorized matrix exactly.
        model.kernel.nugget_scalar += fact.jitter;
        c.diagonal().array() += fact.jitter;
        fact = factorize_with_jitter(c);
        if (!fact.ok) throw ill_conditioned("fit_gp: final covariance not factorizable");
    } else {
        model.jitter = fact.jitter;
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    model.cinv_one = fact.llt.solve(ones);
    model.one_cinv_one = model.cinv_one.sum();
    const Eigen::VectorXd zy = fact.llt.solve(model.training_outputs);
    model.trend = zy.sum() / model.one_cinv_one;
    model.alpha_weights = zy - model.trend * model.cinv_one;
    model.cholesky_factor = fact.llt.matrixL();
    const double quad = model.alpha_weights.dot(model.training_outputs -
                                                model.trend * ones);
    model.log_likelihood = -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) +
                                   log_det_from_llt(fact.llt) + quad);
    return model;
}

namespace {

Eigen::VectorXd scale_query(const GpModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.d())
        throw std::invalid_argument("gp_predict: query has " + std::to_string(query.size()) +
                                    " coordinates, model expects " + std::to_string(model.d()));
    Eigen::VectorXd scaled(query.size());
    for (Eigen::Index k = 0; k < query.size(); ++k) {
        const auto& spec = model.input_specs[static_cast<std::size_t>(k)];
        scaled(k) = (query(k) - spec.lower) / spec.width();
    }
    return scaled;
}

Eigen::VectorXd solve_with_chol(const Eigen::MatrixXd& l, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = l.triangularView<Eigen::Lower>().solve(b);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

}  // namespace

Prediction gp_predict(const GpModel& model, const Eigen::VectorXd& query) {
    const Eigen::VectorXd qs = scale_query(model, query);
    const Eigen::Index n = model.n();
    Eigen::VectorXd cross(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd diff =
            (qs.transpose() - model.training_points.row(i)).cwiseAbs();
        cross(i) = model.kernel.process_variance *
                   pair_correlation(diff, model.kernel.lengthscales, model.kernel.smoothness);
    }
    const Eigen::VectorXd cinv_cross = solve_with_chol(model.cholesky_factor, cross);
    Prediction out;
    out.mean = model.trend + cross.dot(model.alpha_weights);
    const double one_cinv_cross = model.cinv_one.dot(cross);
    const double trend_term =
        (1.0 - one_cinv_cross) * (1.0 - one_cinv_cross) / model.one_cinv_one;
    out.variance = std::max(model.kernel.process_variance - cross.dot(cinv_cross) + trend_term, 0.0);
    return out;
}

PredictionBatch gp_predict(const GpModel& model, const Eigen::MatrixXd& queries) {
    PredictionBatch batch;
    batch.mean.resize(queries.rows());
    batch.variance.resize(queries.rows());
    parallel_for(static_cast<std::size_t>(queries.rows()), [&](std::size_t i) {
        const Eigen::VectorXd query = queries.row(static_cast<Eigen::Index>(i)).transpose();
        const Prediction p = gp_predict(model, query);
        batch.mean(static_cast<Eigen::Index>(i)) = p.mean;
        batch.variance(static_cast<Eigen::Index>(i)) = p.variance;
    });
    return batch;
}

PredictionBatch loo_predictions(const GpModel& model) {
    const Eigen::Index n = model.n();
    // Q = C^{-1} - C^{-1} 1 1^T C^{-1} / (1^T C^{-1} 1): precision projected
    // on the orthogonal complement of the trend. Dubrule's identities give
    // the fold-out predictions without refitting.
    Eigen::MatrixXd cinv = Eigen::MatrixXd::Identity(n, n);
    model.cholesky_factor.triangularView<Eigen::Lower>().solveInPlace(cinv);
    model.cholesky_factor.triangularView<Eigen::Lower>().transpose().solveInPlace(cinv);

    PredictionBatch batch;
    batch.mean.resize(n);
    batch.variance.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q_ii =
            cinv(i, i) - model.cinv_one(i) * model.cinv_one(i) / model.one_cinv_one;
        batch.mean(i) = model.training_outputs(i) - model.alpha_weights(i) / q_ii;
        batch.variance(i) = 1.0 / q_ii;
    }
    return batch;
}

}  // namespace hidim::gp
