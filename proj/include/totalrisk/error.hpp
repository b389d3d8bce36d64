#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace totalrisk {

enum class ErrorCode {
  ProbSumViolation,
  OrphanNode,
  NonUniformDepth,
  ZeroBranch,
  DuplicateId,
  LevelOutOfRange,
  InvalidFiltration,
  InvalidRandomTime,
  InvalidProcess,
  DimensionMismatch,
  HorizonTooShort,
  NonPositiveLambda,
  InvalidDistribution,
  NegativeSupport,
  EmptyTable,
  ZeroTail,
  InvalidTable,
  CalibrationInfeasible,
  EnumerationTooLarge,
  InvalidModel,
  InvalidDensity,
  EmptyBatch,
  MeshTooCoarse,
  PrecisionExhausted,
  ParseError,
  SchemaError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace totalrisk
