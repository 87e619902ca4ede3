#pragma once

#include <stdexcept>
#include <string>

namespace kaczmarz {

/// Base class for all library errors.
class error : public std::runtime_error {
  public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Operands do not conform (vector lengths, matrix shapes).
class dimension_error : public error {
  public:
    using error::error;
};

/// A row with zero norm was used where a positive norm is required.
class degenerate_row_error : public error {
  public:
    degenerate_row_error(const std::string& what, std::size_t row)
        : error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
    std::size_t row() const { return row_; }

  private:
    std::size_t row_;
};

/// An argument is outside its admissible range.
class parameter_error : public error {
  public:
    using error::error;
};

/// A matrix is numerically rank-deficient where full column rank is required.
class singular_matrix_error : public error {
  public:
    singular_matrix_error(const std::string& what, double sigma_min)
        : error(what + " (sigma_min = " + std::to_string(sigma_min) + ")"),
          sigma_min_(sigma_min) {}
    double sigma_min() const { return sigma_min_; }

  private:
    double sigma_min_;
};

/// An iterative kernel failed to converge or broke down.
class numerical_error : public error {
  public:
    using error::error;
};

/// A request exceeds a hard size budget.
class size_error : public error {
  public:
    using error::error;
};

/// File I/O failure, message carries the path.
class io_error : public error {
  public:
    io_error(const std::string& what, const std::string& path)
        : error(what + ": " + path) {}
};

} // namespace kaczmarz
