#include "hidim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hidim::optim {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, double initial_step,
                             std::size_t max_evaluations, double value_tolerance) {
    const Eigen::Index dim = start.size();
    NelderMeadResult result;
    result.best_point = start;
    result.best_value = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const Eigen::VectorXd& x) {
        const double f = objective(x);
        ++result.evaluations;
        if (f < result.best_value) {
            result.best_value = f;
            result.best_point = x;
        }
        return f;
    };

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(dim) + 1, start);
    std::vector<double> values(simplex.size());
    values[0] = evaluate(simplex[0]);
    for (Eigen::Index i = 0; i < dim; ++i) {
        simplex[static_cast<std::size_t>(i) + 1](i) += initial_step;
        values[static_cast<std::size_t>(i) + 1] = evaluate(simplex[static_cast<std::size_t>(i) + 1]);
    }

    std::vector<std::size_t> order(simplex.size());
    const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

    while (result.evaluations < max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        if (std::abs(values[worst] - values[best]) <
            value_tolerance * (1.0 + std::abs(values[best])))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t s : order)
            if (s != worst) centroid += simplex[s];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + reflect * (centroid - simplex[worst]);
        const double f_reflected = evaluate(reflected);

        if (f_reflected < values[best]) {
            const Eigen::VectorXd expanded = centroid + expand * (reflected - centroid);
            const double f_expanded = evaluate(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < values[worst];
            const Eigen::VectorXd base = outside ? reflected : simplex[worst];
            const Eigen::VectorXd contracted = centroid + contract * (base - centroid);
            const double f_contracted = evaluate(contracted);
            if (f_contracted < std::min(f_reflected, values[worst])) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t s : order) {
                    if (s == best) continue;
                    simplex[s] = simplex[best] + shrink * (simplex[s] - simplex[best]);
                    values[s] = evaluate(simplex[s]);
                    if (result.evaluations >= max_evaluations) break;
                }
            }
        }
    }
    return result;
}

}  // namespace hidim::optim
