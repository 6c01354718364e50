#pragma once

#include <stdexcept>
#include <string>

namespace hyperstat {

/// A natural parameter lies outside (or too close to the boundary of) its open cone.
class cone_violation : public std::domain_error {
 public:
  explicit cone_violation(const std::string& what) : std::domain_error(what) {}
};

/// A moment parameter is not realizable, e.g. a sufficient-statistic average of
/// coincident points.
class dual_domain_error : public std::domain_error {
 public:
  explicit dual_domain_error(const std::string& what) : std::domain_error(what) {}
};

class dimension_mismatch : public std::invalid_argument {
 public:
  explicit dimension_mismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// The operation exists only for a subset of dimensions (most d = 2 routines).
class unsupported_dimension : public std::invalid_argument {
 public:
  explicit unsupported_dimension(const std::string& what) : std::invalid_argument(what) {}
};

/// EM could not produce a non-degenerate fit within its restart budget.
class em_failure : public std::runtime_error {
 public:
  explicit em_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hyperstat
