#pragma once

#include <stdexcept>
#include <string>

namespace msrl {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input: shape mismatches, unreadable files, invalid columns.
class data_error : public error {
public:
    explicit data_error(const std::string& what) : error(what) {}
};

/// Numerical breakdown: non-finite iterates, factorization failure.
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& what) : error(what) {}
};

/// Residual matrix has fewer than q non-zero singular values where full
/// column rank is required (first-order checks, nuclear-norm gradient).
class rank_deficient_error : public error {
public:
    explicit rank_deficient_error(const std::string& what) : error(what) {}
};

} // namespace msrl
