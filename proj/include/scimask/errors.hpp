#ifndef SCIMASK_ERRORS_HPP
#define SCIMASK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scimask {

/// Dimensions of two cubes (or a cube and a measurement) disagree.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// A parameter lies outside the domain of the operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A theorem's hypotheses fail for the given parameters (e.g. lambda_min <= 0).
class InapplicableError : public std::runtime_error {
public:
    explicit InapplicableError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative numerical routine did not converge.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace scimask

#endif // SCIMASK_ERRORS_HPP
