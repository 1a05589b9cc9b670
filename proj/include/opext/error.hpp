#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opext {

enum class Errc {
  DimensionMismatch,
  NotFinite,
  NotHermitian,
  NotPsd,
  NotProjector,
  DependentDomain,
  RestrictionConditionFailed,
  NotABounded,
  NotFBounded,
  NotSymmetric,
  IncompatibleInstance,
  HypothesisViolated,
  Infeasible,
  InvalidDims,
  InvalidInput,
  NumericalFailure,
};

/// Coarse outcome class, used by the CLI to pick an exit code.
enum class Outcome { Infeasible, InvalidInput, NumericalFailure };

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotFinite: return "NotFinite";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NotPsd: return "NotPsd";
    case Errc::NotProjector: return "NotProjector";
    case Errc::DependentDomain: return "DependentDomain";
    case Errc::RestrictionConditionFailed: return "RestrictionConditionFailed";
    case Errc::NotABounded: return "NotABounded";
    case Errc::NotFBounded: return "NotFBounded";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::IncompatibleInstance: return "IncompatibleInstance";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::Infeasible: return "Infeasible";
    case Errc::InvalidDims: return "InvalidDims";
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

constexpr Outcome classify(Errc code) {
  switch (code) {
    case Errc::RestrictionConditionFailed:
    case Errc::NotABounded:
    case Errc::NotFBounded:
    case Errc::NotSymmetric:
    case Errc::IncompatibleInstance:
    case Errc::HypothesisViolated:
    case Errc::Infeasible:
      return Outcome::Infeasible;
    case Errc::NumericalFailure:
      return Outcome::NumericalFailure;
    default:
      return Outcome::InvalidInput;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace opext
