#pragma once

#include <stdexcept>
#include <string>

namespace dppphd {

/// Kernel spectrum reaches the excluded region near 1.
struct SpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Combinatorial oracle bound exceeded.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateVariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateIntensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration problem; message carries the offending field.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct UnknownPreset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dppphd
