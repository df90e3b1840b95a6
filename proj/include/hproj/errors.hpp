#pragma once

#include <stdexcept>
#include <string>

namespace hproj {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HPROJ_ERROR(Name)                    \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

HPROJ_ERROR(DegenerateMetric)
HPROJ_ERROR(SingularMatrix)
HPROJ_ERROR(ChartEscape)
HPROJ_ERROR(DegenerateCurve)
HPROJ_ERROR(NotReconstructible)
HPROJ_ERROR(InvalidParams)
HPROJ_ERROR(InterlacingViolation)
HPROJ_ERROR(DegenerateFamily)
HPROJ_ERROR(StepRejected)
HPROJ_ERROR(ConfigError)

#undef HPROJ_ERROR

}  // namespace hproj
