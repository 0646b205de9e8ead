#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hypgreen/curve_file.hpp"
#include "hypgreen/laplace.hpp"

namespace hypgreen::report {

struct Gate {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct PipelineOptions {
  int resolution = 64;
  int eigs = 200;
  double tol_thmA = 1e-2;    // max |Theorem A residual|
  double tol_thmB = 2e-2;    // |Theorem B residual|
  double tol_phi_genus1 = 5e-3;
};

/// Full pipeline result for one curve: periods, mesh, Green matrix, psi,
/// phi, delta logs, residuals, gate outcomes, and the JSON report carrying a
/// provenance block (module, parameters, error estimate) per quantity.
struct InvariantReport {
  branch::BranchSet bs;
  periods::CurveData curve;
  Eigen::MatrixXd delta_log_matrix;  // log|delta_ij|, zero diagonal
  Eigen::MatrixXd green_matrix;
  double psi = 0.0;
  double phi = 0.0;
  double phi_tail = 0.0;
  Eigen::MatrixXd thmA_residuals;
  double thmA_max = 0.0;
  double thmA_spread = 0.0;
  double thmB_residual = 0.0;
  double green_symmetry_defect = 0.0;  // pre-symmetrization solver estimate
  std::optional<double> eq11_residual_max;  // genus 1 only
  std::optional<cplx> modulus;              // genus 1 only, reduced
  std::vector<Gate> gates;
  bool pass = false;
  PipelineOptions options;
};

InvariantReport run_invariants(const branch::BranchSet& bs, const PipelineOptions& opt);

nlohmann::json to_json(const InvariantReport& rep);

/// One row of a degeneration sweep (the CSV columns, in order).
struct SweepRow {
  double t = 0.0;
  double log_t = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double phi_tail_est = 0.0;
  double thmB_residual = 0.0;
  double max_thmA_residual = 0.0;
};

struct DegenerationFit {
  std::vector<SweepRow> rows;
  double slope_psi = 0.0;      // least-squares slope of psi against log t
  double slope_phi = 0.0;      // slope of phi/(2h) against log t
  double intercept_psi = 0.0;
  double intercept_phi = 0.0;
  double fit_residual = 0.0;   // worst absolute linear-fit residual
  double thmB_track_max = 0.0; // max |psi - phi/(2h) - log 2| over the sweep
  bool psi_monotone = false;   // psi increases as t decreases
  std::vector<Gate> gates;
  bool pass = false;
};

struct SweepOptions {
  int resolution = 64;
  int eigs = 200;
  double tol_slope_match = 0.02;
  double tol_thmB_track = 2e-2;
};

DegenerationFit run_degenerate(const io::DegenerationFamily& fam, const SweepOptions& opt);

nlohmann::json to_json(const io::DegenerationFamily& fam, const DegenerationFit& fit,
                       const SweepOptions& opt);
std::string sweep_csv(const DegenerationFit& fit);

/// Genus-1 closed-form checks driven either by a modulus or by a curve.
struct EllipticReport {
  std::optional<cplx> tau;
  std::vector<Gate> gates;
  std::vector<std::pair<std::string, double>> residuals;
  bool pass = false;
};

EllipticReport run_elliptic_tau(cplx tau, int max_n);
EllipticReport run_elliptic_curve(const branch::BranchSet& bs);
nlohmann::json to_json(const EllipticReport& rep);

}  // namespace hypgreen::report
