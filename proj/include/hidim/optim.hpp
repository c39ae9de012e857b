#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace hidim::optim {

struct NelderMeadResult {
    Eigen::VectorXd best_point;
    double best_value = 0.0;
    std::size_t evaluations = 0;
};

/// Derivative-free simplex minimization. Deterministic; returns the best
/// point evaluated anywhere during the run, which includes the start, so the
/// result is never worse than objective(start).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, double initial_step,
                             std::size_t max_evaluations, double value_tolerance = 1e-10);

}  // namespace hidim::optim
