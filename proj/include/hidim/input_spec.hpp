#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hidim {

/// One uncertain scalar input, defined by its variation range.
struct InputSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;

    InputSpec() = default;
    InputSpec(std::string name_, double lower_, double upper_)
        : name(std::move(name_)), lower(lower_), upper(upper_) {
        if (!(lower < upper)) {
            throw std::invalid_argument("InputSpec '" + name + "': lower bound " +
                                        std::to_string(lower) + " must be strictly below upper " +
                                        std::to_string(upper));
        }
    }

    double width() const { return upper - lower; }
};

/// d inputs named x1..xd on the unit cube.
inline std::vector<InputSpec> unit_inputs(std::size_t d) {
    std::vector<InputSpec> specs;
    specs.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
        specs.emplace_back("x" + std::to_string(k + 1), 0.0, 1.0);
    }
    return specs;
}

}  // namespace hidim
