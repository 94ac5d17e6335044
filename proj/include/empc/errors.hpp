#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace empc {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// A physical constant, tuning weight, or bound violates its validity range.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Matrix or vector dimensions do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A synthesis step (observer placement, controller construction, ...) cannot
/// be completed for the given model.
class DesignError : public Error {
public:
    using Error::Error;
};

/// Malformed byte frame.  `offset` is the index of the offending byte within
/// the frame buffer that was being decoded.
class FrameError : public Error {
public:
    FrameError(const std::string& what_arg, std::size_t offset_arg)
        : Error(what_arg), offset(offset_arg) {}
    std::size_t offset;
};

/// A value cannot be represented in the fixed-width wire format.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Point location failed: no stored region contains the query point.  Carries
/// the closest region and how far outside of it the point lies.
class NoRegionFound : public Error {
public:
    NoRegionFound(const std::string& what_arg, int nearest_region_arg, double violation_arg)
        : Error(what_arg), nearest_region(nearest_region_arg), violation(violation_arg) {}
    int nearest_region;
    double violation;
};

/// A serialized controller artifact failed validation (bad magic, truncated
/// payload, inconsistent counts, ...).
class CorruptArtifact : public Error {
public:
    using Error::Error;
};

/// Problem in a configuration or scenario file; the message carries
/// file:line context.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace empc
