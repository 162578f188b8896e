#pragma once

#include <stdexcept>
#include <string>

namespace resil {

// Error classes map onto the CLI exit codes: config 2, ingest 3, compute 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace resil
