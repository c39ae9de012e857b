#include "hidim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hidim/csv.hpp"
#include "hidim/errors.hpp"

namespace hidim::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
    }
}

long long to_integer(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + value +
                                    "'");
    }
}

bool to_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

PipelineConfig parse_config(const std::string& content) {
    PipelineConfig cfg;
    std::istringstream in(content);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "inputs" && section != "design" && section != "screening" &&
                section != "gp" && section != "validation")
                throw std::invalid_argument("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (section == "inputs") {
            const auto comma = value.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("config: input '" + key +
                                            "' expects 'lower, upper'");
            const double lower = to_double(trim(value.substr(0, comma)), key);
            const double upper = to_double(trim(value.substr(comma + 1)), key);
            cfg.inputs.emplace_back(key, lower, upper);
        } else if (section == "design") {
            if (key == "n") cfg.design.n = static_cast<std::size_t>(to_integer(value, key));
            else if (key == "seed") cfg.design.seed = static_cast<std::uint64_t>(to_integer(value, key));
            else if (key == "optimize_budget")
                cfg.design.optimize_budget = static_cast<std::size_t>(to_integer(value, key));
            else if (key == "centered") cfg.design.centered = to_bool(value, key);
            else throw std::invalid_argument("config: unknown key '" + key + "' in [design]");
        } else if (section == "screening") {
            if (key == "alpha") cfg.screening.alpha = to_double(value, key);
            else if (key == "test") {
                if (value == "gamma") cfg.screening.test = screening::TestKind::asymptotic_gamma;
                else if (value == "permutation")
                    cfg.screening.test = screening::TestKind::permutation;
                else
                    throw std::invalid_argument(
                        "config: test must be 'gamma' or 'permutation', got '" + value + "'");
            } else if (key == "permutations")
                cfg.screening.permutations = static_cast<std::size_t>(to_integer(value, key));
            else throw std::invalid_argument("config: unknown key '" + key + "' in [screening]");
        } else if (section == "gp") {
            if (key == "multi_starts") cfg.gp.multi_starts = static_cast<int>(to_integer(value, key));
            else if (key == "optimizer_budget")
                cfg.gp.optimizer_budget = static_cast<int>(to_integer(value, key));
            else if (key == "dispersion_floor_factor")
                cfg.gp.dispersion_floor_factor = to_double(value, key);
            else if (key == "smoothness") cfg.gp.smoothness = to_double(value, key);
            else throw std::invalid_argument("config: unknown key '" + key + "' in [gp]");
        } else if (section == "validation") {
            if (key == "mode") {
                if (value == "test") cfg.validation.mode = jointgp::ValidationMode::test_sample;
                else if (value == "loo")
                    cfg.validation.mode = jointgp::ValidationMode::leave_one_out;
                else
                    throw std::invalid_argument("config: mode must be 'test' or 'loo', got '" +
                                                value + "'");
            } else if (key == "test_fraction")
                cfg.validation.test_fraction = to_double(value, key);
            else throw std::invalid_argument("config: unknown key '" + key + "' in [validation]");
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside any section");
        }
    }
    validate(cfg);
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream content;
    content << in.rdbuf();
    return parse_config(content.str());
}

void validate(const PipelineConfig& config) {
    if (!(config.screening.alpha > 0.0 && config.screening.alpha < 1.0))
        throw std::invalid_argument("config: alpha must lie in (0, 1)");
    if (config.validation.mode == jointgp::ValidationMode::test_sample &&
        !(config.validation.test_fraction > 0.0 && config.validation.test_fraction < 1.0))
        throw std::invalid_argument("config: test_fraction must lie in (0, 1)");
    if (config.screening.permutations == 0)
        throw std::invalid_argument("config: permutations must be >= 1");
    if (config.gp.multi_starts < 1)
        throw std::invalid_argument("config: multi_starts must be >= 1");
    if (config.gp.optimizer_budget < 1)
        throw std::invalid_argument("config: optimizer_budget must be >= 1");
    if (config.gp.smoothness != 2.5 && config.gp.smoothness != 1.5)
        throw std::invalid_argument("config: smoothness must be 2.5 or 1.5");
    if (!(config.gp.dispersion_floor_factor > 0.0))
        throw std::invalid_argument("config: dispersion_floor_factor must be positive");
}

std::string canonical_dump(const PipelineConfig& config) {
    std::ostringstream out;
    out << "[inputs]\n";
    for (const auto& spec : config.inputs)
        out << spec.name << " = " << io::format_double(spec.lower) << ", "
            << io::format_double(spec.upper) << "\n";
    out << "[design]\n";
    out << "n = " << config.design.n << "\n";
    out << "seed = " << config.design.seed << "\n";
    out << "optimize_budget = " << config.design.optimize_budget << "\n";
    out << "centered = " << (config.design.centered ? "true" : "false") << "\n";
    out << "[screening]\n";
    out << "alpha = " << io::format_double(config.screening.alpha) << "\n";
    out << "test = "
        << (config.screening.test == screening::TestKind::asymptotic_gamma ? "gamma"
                                                                           : "permutation")
        << "\n";
    out << "permutations = " << config.screening.permutations << "\n";
    out << "[gp]\n";
    out << "multi_starts = " << config.gp.multi_starts << "\n";
    out << "optimizer_budget = " << config.gp.optimizer_budget << "\n";
    out << "dispersion_floor_factor = " << io::format_double(config.gp.dispersion_floor_factor)
        << "\n";
    out << "smoothness = " << io::format_double(config.gp.smoothness) << "\n";
    out << "[validation]\n";
    out << "mode = "
        << (config.validation.mode == jointgp::ValidationMode::test_sample ? "test" : "loo")
        << "\n";
    out << "test_fraction = " << io::format_double(config.validation.test_fraction) << "\n";
    return out.str();
}

}  // namespace hidim::config
