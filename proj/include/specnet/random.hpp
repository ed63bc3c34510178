#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace specnet {

using Rng = std::mt19937_64;

// Subsystem seed from a master seed and a label ("graph", "ics", ...).
std::uint64_t derive_seed(std::uint64_t master, const std::string& label);
std::uint64_t derive_seed(std::uint64_t master, const std::string& label, std::uint64_t index);

struct Distribution {
    enum class Kind { uniform, normal, constant, two_point };
    Kind kind = Kind::constant;
    double a = 0.0;  // uniform low, normal mean, constant value, two_point P(+1)
    double b = 0.0;  // uniform high, normal std

    static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static Distribution normal(double mean, double sd) { return {Kind::normal, mean, sd}; }
    static Distribution constant(double v) { return {Kind::constant, v, 0.0}; }
    // +1 with probability p_plus, -1 otherwise
    static Distribution two_point(double p_plus = 0.5) { return {Kind::two_point, p_plus, 0.0}; }

    double sample(Rng& rng) const;
    double mean() const;
    double variance() const;

    std::string describe() const;
    // "uniform(0,0.1)", "normal(0,1)", "constant(2)", "two_point(0.5)"
    static Distribution parse(const std::string& text);
};

}  // namespace specnet
