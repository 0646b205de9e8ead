#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace hypgreen {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846264338327950288;

enum class errc {
  duplicate_point,
  wrong_count,
  multiple_infinities,
  index_out_of_range,
  equal_indices,
  repeated_indices,
  degenerate_map,
  bad_modulus,
  origin_singularity,
  not_genus_one,
  quadrature_failure,
  near_degenerate,
  not_positive_definite,
  at_branch_point,
  resolution_too_low,
  singular_value,
  disconnected_mesh,
  solver_failure,
  evaluation_at_pole,
  insufficient_spectrum,
  fit_unstable,
  gate_failure,
  parse_error,
};

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_point: return "DuplicatePoint";
    case errc::wrong_count: return "WrongCount";
    case errc::multiple_infinities: return "MultipleInfinities";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::equal_indices: return "EqualIndices";
    case errc::repeated_indices: return "RepeatedIndices";
    case errc::degenerate_map: return "DegenerateMap";
    case errc::bad_modulus: return "BadModulus";
    case errc::origin_singularity: return "OriginSingularity";
    case errc::not_genus_one: return "NotGenusOne";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::near_degenerate: return "NearDegenerate";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::at_branch_point: return "AtBranchPoint";
    case errc::resolution_too_low: return "ResolutionTooLow";
    case errc::singular_value: return "SingularValue";
    case errc::disconnected_mesh: return "DisconnectedMesh";
    case errc::solver_failure: return "SolverFailure";
    case errc::evaluation_at_pole: return "EvaluationAtPole";
    case errc::insufficient_spectrum: return "InsufficientSpectrum";
    case errc::fit_unstable: return "FitUnstable";
    case errc::gate_failure: return "GateFailure";
    case errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hypgreen
