#pragma once

#include <stdexcept>
#include <string>

namespace wasubench {

/// Base of every error the toolkit throws. `kind()` names the failure class
/// in the form it is reported on the command line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define WASUBENCH_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  }

// registry
WASUBENCH_DEFINE_ERROR(MalformedConfig);
WASUBENCH_DEFINE_ERROR(DuplicateName);
WASUBENCH_DEFINE_ERROR(MissingPlaceholder);
WASUBENCH_DEFINE_ERROR(UnknownSubruntime);
WASUBENCH_DEFINE_ERROR(UnknownRuntime);
WASUBENCH_DEFINE_ERROR(UnknownBenchmark);
WASUBENCH_DEFINE_ERROR(IoError);

// results
WASUBENCH_DEFINE_ERROR(SchemaError);

// analysis
WASUBENCH_DEFINE_ERROR(MalformedProfile);
WASUBENCH_DEFINE_ERROR(InvariantViolation);
WASUBENCH_DEFINE_ERROR(EmptyProfile);
WASUBENCH_DEFINE_ERROR(DegenerateModule);

// pca
WASUBENCH_DEFINE_ERROR(TooFewRows);
WASUBENCH_DEFINE_ERROR(NoConvergence);
WASUBENCH_DEFINE_ERROR(IndexOutOfRange);
WASUBENCH_DEFINE_ERROR(MalformedTable);

// plot
WASUBENCH_DEFINE_ERROR(NonPositiveValue);
WASUBENCH_DEFINE_ERROR(EmptySeries);

#undef WASUBENCH_DEFINE_ERROR

}  // namespace wasubench
