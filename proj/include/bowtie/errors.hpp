#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bowtie {

/// Input that violates a documented invariant. `field()` names the offending
/// parameter when there is one.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Mesh generation could not produce a valid triangulation.
class MeshingError : public std::runtime_error {
public:
    MeshingError(std::string region, const std::string& what)
        : std::runtime_error(what + " (region: " + region + ")"), region_(std::move(region)) {}

    const std::string& region() const noexcept { return region_; }

private:
    std::string region_;
};

/// A factorization, eigensolve or root bracket failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The problem exceeds a configured resource limit (dense size cap).
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, double suggested_h)
        : std::runtime_error(what), suggested_h_(suggested_h) {}

    double suggested_h() const noexcept { return suggested_h_; }

private:
    double suggested_h_;
};

/// The mesh does not resolve a requested length scale.
class ResolutionError : public std::runtime_error {
public:
    ResolutionError(const std::string& what, double required_grading_target)
        : std::runtime_error(what), required_(required_grading_target) {}

    double required_grading_target() const noexcept { return required_; }

private:
    double required_;
};

}  // namespace bowtie
