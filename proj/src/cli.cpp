#include "hypgreen/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "hypgreen/report.hpp"
#include "hypgreen/surface_mesh.hpp"

namespace hypgreen::cli {

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(errc::parse_error, "cannot open output file: " + path);
  out << text;
}

void report_gates(const std::vector<report::Gate>& gates) {
  for (const auto& g : gates)
    std::cerr << (g.pass ? "[pass] " : "[FAIL] ") << g.name << " = " << g.value
              << " (tolerance " << g.tolerance << ")\n";
}

cplx parse_tau(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw Error(errc::parse_error, "--tau expects RE,IM");
  return cplx(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"canonical Green's functions and spectral invariants of hyperelliptic curves"};
  app.require_subcommand(1);

  std::string curve_path, family_path, out_path = "-", tau_str;
  int resolution = 64, eigs = 200, max_n = 5;
  double tol_thmA = 1e-2, tol_thmB = 2e-2, tol_slope = 0.02;

  auto* inv = app.add_subcommand("invariants", "full invariant report for one curve");
  inv->add_option("--curve", curve_path, "curve file")->required();
  inv->add_option("--resolution", resolution, "mesh resolution (default 64)");
  inv->add_option("--eigs", eigs, "spectral truncation (default 200)");
  inv->add_option("--out", out_path, "report path (default stdout)");
  inv->add_option("--tol-thmA", tol_thmA, "gate on the first residual family");
  inv->add_option("--tol-thmB", tol_thmB, "gate on the energy identity residual");

  auto* deg = app.add_subcommand("degenerate", "pinching-family sweep with slope fits");
  deg->add_option("--family", family_path, "family file")->required();
  deg->add_option("--resolution", resolution, "mesh resolution (default 64)");
  deg->add_option("--eigs", eigs, "spectral truncation (default 200)");
  deg->add_option("--out", out_path, "output base path (writes .json and .csv)")
      ->required();
  deg->add_option("--tol-slope", tol_slope, "gate on the fitted slope difference");
  deg->add_option("--tol-thmB", tol_thmB, "gate on the energy identity track");

  auto* ell = app.add_subcommand("elliptic-check", "closed-form genus-1 identities");
  ell->add_option("--tau", tau_str, "modulus RE,IM");
  ell->add_option("--curve", curve_path, "genus-1 curve file");
  ell->add_option("--max-n", max_n, "largest torsion order (default 5)");
  ell->add_option("--out", out_path, "report path (default stdout)");

  auto* dump = app.add_subcommand("mesh-dump", "write the surface mesh as flat text");
  dump->add_option("--curve", curve_path, "curve file")->required();
  dump->add_option("--resolution", resolution, "mesh resolution (default 64)");
  dump->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (inv->parsed()) {
      report::PipelineOptions opt;
      opt.resolution = resolution;
      opt.eigs = eigs;
      opt.tol_thmA = tol_thmA;
      opt.tol_thmB = tol_thmB;
      const auto rep = report::run_invariants(io::read_curve_file(curve_path), opt);
      write_text(out_path, report::to_json(rep).dump(2) + "\n");
      report_gates(rep.gates);
      if (!rep.pass) {
        std::cerr << "gate failure\n";
        return 1;
      }
      return 0;
    }
    if (deg->parsed()) {
      report::SweepOptions opt;
      opt.resolution = resolution;
      opt.eigs = eigs;
      opt.tol_slope_match = tol_slope;
      opt.tol_thmB_track = tol_thmB;
      const auto fam = io::read_family_file(family_path);
      const auto fit = report::run_degenerate(fam, opt);
      write_text(out_path + ".json", report::to_json(fam, fit, opt).dump(2) + "\n");
      write_text(out_path + ".csv", report::sweep_csv(fit));
      report_gates(fit.gates);
      if (!fit.pass) {
        std::cerr << "gate failure\n";
        return 1;
      }
      return 0;
    }
    if (ell->parsed()) {
      report::EllipticReport rep;
      if (!tau_str.empty())
        rep = report::run_elliptic_tau(parse_tau(tau_str), max_n);
      else if (!curve_path.empty())
        rep = report::run_elliptic_curve(io::read_curve_file(curve_path));
      else {
        std::cerr << "elliptic-check needs --tau or --curve\n";
        return 2;
      }
      write_text(out_path, report::to_json(rep).dump(2) + "\n");
      report_gates(rep.gates);
      if (!rep.pass) {
        std::cerr << "gate failure\n";
        return 1;
      }
      return 0;
    }
    if (dump->parsed()) {
      const auto cd = periods::analyze_curve(io::read_curve_file(curve_path));
      const auto mesh = surface::build_mesh(cd, resolution);
      std::ostringstream os;
      surface::dump_mesh(mesh, os);
      write_text(out_path, os.str());
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return e.code() == errc::parse_error ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace hypgreen::cli
