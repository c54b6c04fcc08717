#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkhs {

/// Contract violation by the caller: bad shapes, mismatched kernels, malformed input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization or eigensolver could not produce a result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cholesky breakdown. `pivot` is 1-based, matching the row at which the
/// Schur complement stopped being positive.
class CholeskyError : public NumericalError {
public:
    explicit CholeskyError(std::size_t pivot)
        : NumericalError("Gram matrix is not positive definite (Cholesky failed at pivot " +
                         std::to_string(pivot) + ")"),
          pivot_(pivot) {}

    [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

}  // namespace rkhs
