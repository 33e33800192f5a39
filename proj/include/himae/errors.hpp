#pragma once

#include <stdexcept>
#include <string>

namespace himae {

// Invalid configuration: bad conv specs, malformed configs, unknown keys.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes disagree (channel/length mismatch between tensors).
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input too short to produce at least one output sample.
struct input_too_short : shape_error {
    using shape_error::shape_error;
};

// API contract violated (non-scalar backward root, level out of range, ...).
struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate numeric situation: empty mask, zero-variance reference,
// single-class AUROC, NaN gradients.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace himae
