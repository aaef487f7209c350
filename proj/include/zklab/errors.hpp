#pragma once

#include <stdexcept>

namespace zk {

// Enumeration or work-estimate cap was hit before a result was produced.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The computation produced non-finite or runaway values (e.g. solver blowup).
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace zk
