#pragma once

#include <stdexcept>
#include <string>

namespace gmsplit {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// averaged gradient with zero norm; callers decide the fallback
struct DegenerateGradientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NothingToSplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gmsplit
