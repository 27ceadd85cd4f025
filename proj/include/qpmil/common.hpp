#pragma once

#include <stdexcept>
#include <string>

namespace qpmil {

// Guard used inside every norm division; oracles must use the same value.
inline constexpr double kNormEpsilon = 1e-12;
// Floor for probabilities entering a log.
inline constexpr double kProbEpsilon = 1e-12;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw Error(message);
    }
}

}  // namespace qpmil
