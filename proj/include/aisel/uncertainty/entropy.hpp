#ifndef AISEL_UNCERTAINTY_ENTROPY_HPP
#define AISEL_UNCERTAINTY_ENTROPY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "aisel/error.hpp"

namespace aisel::uncertainty {

inline constexpr double kSimplexTolerance = 1e-9;

/// Shannon entropy in nats, with 0 * ln 0 taken as 0.
inline double entropy(std::span<const double> probs) {
    double sum = 0.0;
    double h = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw ArgumentError("probability " + std::to_string(p) + " is negative or NaN");
        sum += p;
        if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw ArgumentError("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    // Rounding can push the uniform case an ulp past ln K.
    return std::min(h, std::log(static_cast<double>(probs.size())));
}

} // namespace aisel::uncertainty

#endif
