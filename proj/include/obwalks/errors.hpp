#pragma once

#include <stdexcept>
#include <string>

namespace obwalks {

// Bad user-supplied input or argument outside a documented domain. CLI exit 2.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request exceeds a configured ceiling (memory, iteration budget, list size).
// The message names the parameter that must shrink. CLI exit 3.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine failed to meet its stated tolerance or invariant. CLI exit 4.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Point sits on the degenerate locus F(s,t) = 0; callers must filter these.
struct degenerate_fibre_error : validation_error {
    using validation_error::validation_error;
};

// Cross-check failed inside the library (symbol parity, sigma overlap window).
// Never caught internally; reaching one means a bug, not bad input.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace obwalks
