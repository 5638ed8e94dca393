#ifndef SALGRAPH_ERROR_HPP_
#define SALGRAPH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace salgraph {

// Base of everything the library throws. The CLI maps the three leaf kinds
// onto exit codes 2 (config), 3 (data contract) and 4 (runtime).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration; detected before any work is done.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a format or shape contract (bad magic, dims, NaN...).
class DataError : public Error {
 public:
  using Error::Error;
};

// I/O failures, solver non-convergence and other failures at run time.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace salgraph

#endif  // SALGRAPH_ERROR_HPP_
