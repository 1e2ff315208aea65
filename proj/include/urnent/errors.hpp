#pragma once

#include <stdexcept>
#include <string>

namespace urnent {

// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A bound was requested outside the hypotheses under which it is proved.
class applicability_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class length_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Certified evaluation could not reach the requested width.
class precision_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw domain_error(what);
}

inline void require_applicable(bool ok, const std::string& what) {
  if (!ok) throw applicability_error(what);
}

}  // namespace detail
}  // namespace urnent
