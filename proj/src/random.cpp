#include "specnet/random.hpp"

#include <cmath>
#include <sstream>

#include "specnet/common.hpp"

namespace specnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, const std::string& label) {
    return splitmix64(splitmix64(master) ^ fnv1a(label));
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& label, std::uint64_t index) {
    return splitmix64(derive_seed(master, label) + index * 0x9e3779b97f4a7c15ULL);
}

double Distribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::uniform: return std::uniform_real_distribution<double>(a, b)(rng);
        case Kind::normal: return std::normal_distribution<double>(a, b)(rng);
        case Kind::constant: return a;
        case Kind::two_point: return std::bernoulli_distribution(a)(rng) ? 1.0 : -1.0;
    }
    return 0.0;
}

double Distribution::mean() const {
    switch (kind) {
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::normal: return a;
        case Kind::constant: return a;
        case Kind::two_point: return 2.0 * a - 1.0;
    }
    return 0.0;
}

double Distribution::variance() const {
    switch (kind) {
        case Kind::uniform: return (b - a) * (b - a) / 12.0;
        case Kind::normal: return b * b;
        case Kind::constant: return 0.0;
        case Kind::two_point: {
            double m = mean();
            return 1.0 - m * m;
        }
    }
    return 0.0;
}

std::string Distribution::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::uniform: os << "uniform(" << a << "," << b << ")"; break;
        case Kind::normal: os << "normal(" << a << "," << b << ")"; break;
        case Kind::constant: os << "constant(" << a << ")"; break;
        case Kind::two_point: os << "two_point(" << a << ")"; break;
    }
    return os.str();
}

Distribution Distribution::parse(const std::string& text) {
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("bad distribution '" + text + "'");
    std::string name = text.substr(0, open);
    std::string args = text.substr(open + 1, close - open - 1);
    std::vector<double> v;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad distribution argument '" + tok + "' in '" + text + "'");
        }
    }
    auto need = [&](std::size_t k) {
        if (v.size() != k) throw ConfigError("distribution '" + name + "' takes " + std::to_string(k) + " arguments");
    };
    if (name == "uniform") {
        need(2);
        if (v[1] < v[0]) throw ConfigError("uniform with hi < lo");
        return uniform(v[0], v[1]);
    }
    if (name == "normal") {
        need(2);
        if (v[1] < 0) throw ConfigError("normal with negative std");
        return normal(v[0], v[1]);
    }
    if (name == "constant") {
        need(1);
        return constant(v[0]);
    }
    if (name == "two_point") {
        if (v.empty()) return two_point();
        need(1);
        if (v[0] < 0 || v[0] > 1) throw ConfigError("two_point probability outside [0,1]");
        return two_point(v[0]);
    }
    throw ConfigError("unknown distribution '" + name + "'");
}

}  // namespace specnet
