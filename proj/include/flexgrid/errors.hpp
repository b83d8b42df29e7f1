#pragma once

#include <stdexcept>
#include <string>

namespace flexgrid {

// Malformed input data or files. The CLI maps this to exit code 1.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model request that cannot be satisfied: anchor not on a grid line,
// spacing constraint unsatisfiable, bounds inverted. CLI exit code 2.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace flexgrid
