#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specgeo {

enum class ErrorKind {
  NonSymmetric,
  NoConvergence,
  BadNodeCount,
  BadParameter,
  GridTooCoarse,
  DensityUnderflow,
  DegenerateSplit,
  RankDeficient,
  DimensionMismatch,
  ZeroRowSum,
  ZeroVector,
  EmptyCluster,
  BadTheta,
  DegenerateMeans,
  LengthMismatch,
  BadConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BadNodeCount: return "BadNodeCount";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::DensityUnderflow: return "DensityUnderflow";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroRowSum: return "ZeroRowSum";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::BadTheta: return "BadTheta";
    case ErrorKind::DegenerateMeans: return "DegenerateMeans";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace specgeo
