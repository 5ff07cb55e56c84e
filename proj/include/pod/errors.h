#pragma once

#include <stdexcept>

namespace pod {

// Filesystem/serialization failures; the CLI maps these to exit code 1,
// everything else invalid-input-shaped to exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pod
