#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hidim/input_spec.hpp"

namespace hidim {

/// Space-filling design on the unit hypercube. Rows are points, columns inputs.
/// Satisfies the Latin property: each column has exactly one point per stratum
/// [i/n, (i+1)/n).
struct Design {
    Eigen::MatrixXd points;       // n x d, entries in [0,1]
    std::uint64_t seed = 0;
    double criterion_value = 0.0;  // squared centered-L2 discrepancy of points

    Eigen::Index n() const { return points.rows(); }
    Eigen::Index d() const { return points.cols(); }
};

/// Paired design and code outputs (X_s, Y_s), with the physical input ranges.
struct LearningSample {
    Eigen::MatrixXd points;        // n x d, in physical units
    Eigen::VectorXd outputs;       // n
    std::vector<InputSpec> inputs;

    Eigen::Index n() const { return points.rows(); }
    Eigen::Index d() const { return points.cols(); }
};

/// Latin hypercube sample: for each column, one point uniformly placed inside
/// each of the n strata, strata order shuffled independently per column.
/// With centered = true points sit at stratum midpoints instead.
/// Deterministic for a fixed seed. Throws std::invalid_argument for d = 0 or n < 2.
Design lhs_sample(std::size_t d, std::size_t n, std::uint64_t seed, bool centered = false);

/// True when every column of points has exactly one entry per stratum.
bool is_latin(const Eigen::MatrixXd& points);

/// Squared centered-L2 discrepancy CD^2 (Hickernell closed form).
/// Throws std::invalid_argument on an empty design.
double centered_l2_discrepancy(const Eigen::MatrixXd& points);
double centered_l2_discrepancy(const Design& design);

/// Smallest pairwise Euclidean distance between rows. Requires n >= 2.
double maximin_distance(const Eigen::MatrixXd& points);
double maximin_distance(const Design& design);

/// Simulated annealing over within-column pair swaps, which preserve the
/// Latin property. Returns the best design visited, so the result's
/// discrepancy never exceeds the input's. budget counts candidate swaps;
/// budget = 0 returns the input unchanged. Throws std::invalid_argument if
/// the input is not a Latin hypercube.
Design optimize_lhs(const Design& design, std::size_t budget, std::uint64_t seed);

/// Affine map of unit-cube points onto the input ranges, column by column.
/// Throws std::invalid_argument when the spec list length differs from d.
Eigen::MatrixXd scale_design(const Design& design, const std::vector<InputSpec>& inputs);
Eigen::MatrixXd scale_points(const Eigen::MatrixXd& unit_points, const std::vector<InputSpec>& inputs);

/// Inverse of scale_points: physical coordinates back to the unit cube.
Eigen::MatrixXd unscale_points(const Eigen::MatrixXd& scaled, const std::vector<InputSpec>& inputs);

}  // namespace hidim
