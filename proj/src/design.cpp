#include "hidim/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hidim/rng.hpp"

namespace hidim {

namespace {

// One column entry per pair: the two row-product tables of the Hickernell form.
//   rowterm[i]  = prod_k (1 + |a|/2 - a^2/2),            a = x_ik - 1/2
//   pairterm[i][j] = prod_k (1 + |a|/2 + |b|/2 - |a-b|/2), b = x_jk - 1/2
struct DiscrepancyTables {
    Eigen::VectorXd rowterm;
    Eigen::MatrixXd pairterm;
    double const_term = 0.0;

    double value() const {
        const double n = static_cast<double>(rowterm.size());
        return const_term - 2.0 / n * rowterm.sum() + pairterm.sum() / (n * n);
    }
};

double row_factor(double x) {
    const double a = std::abs(x - 0.5);
    return 1.0 + 0.5 * a - 0.5 * a * a;
}

double pair_factor(double xi, double xj) {
    return 1.0 + 0.5 * std::abs(xi - 0.5) + 0.5 * std::abs(xj - 0.5) - 0.5 * std::abs(xi - xj);
}

DiscrepancyTables build_tables(const Eigen::MatrixXd& pts) {
    const Eigen::Index n = pts.rows();
    const Eigen::Index d = pts.cols();
    DiscrepancyTables t;
    t.const_term = std::pow(13.0 / 12.0, static_cast<double>(d));
    t.rowterm = Eigen::VectorXd::Ones(n);
    t.pairterm = Eigen::MatrixXd::Ones(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) t.rowterm(i) *= row_factor(pts(i, k));
        for (Eigen::Index j = 0; j <= i; ++j) {
            double p = 1.0;
            for (Eigen::Index k = 0; k < d; ++k) p *= pair_factor(pts(i, k), pts(j, k));
            t.pairterm(i, j) = p;
            t.pairterm(j, i) = p;
        }
    }
    return t;
}

// Recompute the table entries touched by changing rows i and j (any columns).
void refresh_rows(DiscrepancyTables& t, const Eigen::MatrixXd& pts, Eigen::Index i, Eigen::Index j) {
    const Eigen::Index n = pts.rows();
    const Eigen::Index d = pts.cols();
    for (Eigen::Index r : {i, j}) {
        double rp = 1.0;
        for (Eigen::Index k = 0; k < d; ++k) rp *= row_factor(pts(r, k));
        t.rowterm(r) = rp;
        for (Eigen::Index m = 0; m < n; ++m) {
            double p = 1.0;
            for (Eigen::Index k = 0; k < d; ++k) p *= pair_factor(pts(r, k), pts(m, k));
            t.pairterm(r, m) = p;
            t.pairterm(m, r) = p;
        }
    }
}

}  // namespace

Design lhs_sample(std::size_t d, std::size_t n, std::uint64_t seed, bool centered) {
    if (d == 0) throw std::invalid_argument("lhs_sample: dimension must be >= 1");
    if (n < 2) throw std::invalid_argument("lhs_sample: need at least 2 points");

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Design design;
    design.seed = seed;
    design.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

    std::vector<std::size_t> strata(n);
    for (std::size_t k = 0; k < d; ++k) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double offset = centered ? 0.5 : unif(rng);
            double x = (static_cast<double>(strata[i]) + offset) / static_cast<double>(n);
            // Guard against rounding onto the next stratum boundary.
            const double hi = static_cast<double>(strata[i] + 1) / static_cast<double>(n);
            if (x >= hi) x = std::nextafter(hi, 0.0);
            design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x;
        }
    }
    design.criterion_value = centered_l2_discrepancy(design.points);
    return design;
}

bool is_latin(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    if (n == 0 || d == 0) return false;
    std::vector<int> occupancy(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < d; ++k) {
        std::fill(occupancy.begin(), occupancy.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = points(i, k);
            if (x < 0.0 || x > 1.0) return false;
            auto s = static_cast<Eigen::Index>(x * static_cast<double>(n));
            if (s >= n) s = n - 1;
            ++occupancy[static_cast<std::size_t>(s)];
        }
        for (int c : occupancy)
            if (c != 1) return false;
    }
    return true;
}

double centered_l2_discrepancy(const Eigen::MatrixXd& points) {
    if (points.rows() == 0 || points.cols() == 0)
        throw std::invalid_argument("centered_l2_discrepancy: empty design");
    return build_tables(points).value();
}

double centered_l2_discrepancy(const Design& design) {
    return centered_l2_discrepancy(design.points);
}

double maximin_distance(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw std::invalid_argument("maximin_distance: need at least 2 points");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            best = std::min(best, (points.row(i) - points.row(j)).norm());
    return best;
}

double maximin_distance(const Design& design) { return maximin_distance(design.points); }

Design optimize_lhs(const Design& design, std::size_t budget, std::uint64_t seed) {
    if (!is_latin(design.points))
        throw std::invalid_argument("optimize_lhs: input does not satisfy the Latin property");

    Design best = design;
    best.criterion_value = centered_l2_discrepancy(design.points);
    if (budget == 0) return best;

    const Eigen::Index n = design.points.rows();
    const Eigen::Index d = design.points.cols();

    Eigen::MatrixXd current = design.points;
    DiscrepancyTables tables = build_tables(current);
    double current_value = tables.value();
    best.criterion_value = current_value;

    auto rng = make_rng(derive_seed(seed, /*stream=*/0x4c4853ULL));
    std::uniform_int_distribution<Eigen::Index> pick_col(0, d - 1);
    std::uniform_int_distribution<Eigen::Index> pick_row(0, n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Geometric cooling; initial temperature keyed to the discrepancy scale.
    double temperature = std::max(1e-3 * current_value, 1e-12);
    const double cooling = std::pow(1e-4, 1.0 / static_cast<double>(budget));

    for (std::size_t step = 0; step < budget; ++step) {
        const Eigen::Index k = pick_col(rng);
        Eigen::Index i = pick_row(rng);
        Eigen::Index j = pick_row(rng);
        if (i == j) j = (j + 1) % n;

        std::swap(current(i, k), current(j, k));
        refresh_rows(tables, current, i, j);
        const double candidate = tables.value();
        const double delta = candidate - current_value;

        const bool accept = delta <= 0.0 || unif(rng) < std::exp(-delta / temperature);
        if (accept) {
            current_value = candidate;
            if (current_value < best.criterion_value) {
                best.points = current;
                best.criterion_value = current_value;
            }
        } else {
            std::swap(current(i, k), current(j, k));
            refresh_rows(tables, current, i, j);
        }
        temperature *= cooling;
    }
    return best;
}

Eigen::MatrixXd scale_points(const Eigen::MatrixXd& unit_points, const std::vector<InputSpec>& inputs) {
    if (static_cast<std::size_t>(unit_points.cols()) != inputs.size())
        throw std::invalid_argument("scale_points: " + std::to_string(inputs.size()) +
                                    " input specs for " + std::to_string(unit_points.cols()) +
                                    " design columns");
    Eigen::MatrixXd scaled = unit_points;
    for (Eigen::Index k = 0; k < scaled.cols(); ++k) {
        const auto& spec = inputs[static_cast<std::size_t>(k)];
        scaled.col(k) = spec.lower + scaled.col(k).array() * spec.width();
    }
    return scaled;
}

Eigen::MatrixXd scale_design(const Design& design, const std::vector<InputSpec>& inputs) {
    return scale_points(design.points, inputs);
}

Eigen::MatrixXd unscale_points(const Eigen::MatrixXd& scaled, const std::vector<InputSpec>& inputs) {
    if (static_cast<std::size_t>(scaled.cols()) != inputs.size())
        throw std::invalid_argument("unscale_points: " + std::to_string(inputs.size()) +
                                    " input specs for " + std::to_string(scaled.cols()) +
                                    " columns");
    Eigen::MatrixXd unit = scaled;
    for (Eigen::Index k = 0; k < unit.cols(); ++k) {
        const auto& spec = inputs[static_cast<std::size_t>(k)];
        unit.col(k) = (unit.col(k).array() - spec.lower) / spec.width();
    }
    return unit;
}

}  // namespace hidim
