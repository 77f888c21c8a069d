#pragma once

#include <stdexcept>

namespace blowlab {

// Invalid experiment setup detected before any computation starts.
struct ConfigurationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace blowlab
