#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "hypgreen/elliptic.hpp"
#include "hypgreen/periods.hpp"
#include "support/random_sets.hpp"

using namespace hypgreen;
using branch::SpherePoint;
using periods::CurveData;

namespace {

cplx j_invariant(cplx tau) {
  const auto tc = elliptic::theta_constants(tau);
  const cplx r = tc.t2 / tc.t3;
  const cplx lam = r * r * r * r;
  const cplx num = 1.0 - lam + lam * lam;
  return 256.0 * num * num * num / (lam * lam * (1.0 - lam) * (1.0 - lam));
}

branch::BranchSet quintic_roots_plus_infinity() {
  std::vector<SpherePoint> pts;
  for (int k = 0; k < 5; ++k)
    pts.push_back(SpherePoint::finite(std::polar(1.0, 2.0 * kPi * k / 5.0)));
  pts.push_back(SpherePoint::infinity());
  return branch::validate_branch_set(pts, 2);
}

}  // namespace

TEST_CASE("genus-1 square-lattice curve reproduces tau = i") {
  const auto bs = branch::validate_branch_set(
      {SpherePoint::finite(0.0), SpherePoint::finite(1.0), SpherePoint::finite(0.5),
       SpherePoint::infinity()},
      1);
  CurveData cd = periods::compute_periods(bs);
  REQUIRE(cd.tau_period.rows() == 1);
  const cplx tau = elliptic::reduce_modulus(cd.tau_period(0, 0)).tau;
  CHECK(std::abs(tau - cplx(0.0, 1.0)) < 1e-8);
  CHECK(cd.quadrature_error < 1e-9);
}

TEST_CASE("period modulus matches the AGM modulus on random genus-1 curves") {
  std::mt19937 rng(404);
  for (int rep = 0; rep < 6; ++rep) {
    const auto bs = testsupport::random_branch_set(rng, 1, rep % 2 == 0);
    CurveData cd = periods::compute_periods(bs);
    const cplx tau_p = elliptic::reduce_modulus(cd.tau_period(0, 0)).tau;
    const cplx tau_agm = elliptic::tau_from_branch(bs).tau;
    CHECK(std::abs(j_invariant(tau_p) - j_invariant(tau_agm)) <
          1e-6 * std::max(1.0, std::abs(j_invariant(tau_agm))));
  }
}

TEST_CASE("Riemann matrix is symmetric with positive-definite imaginary part") {
  std::mt19937 rng(2468);
  for (int h = 2; h <= 3; ++h) {
    const auto bs = testsupport::random_branch_set(rng, h, h == 3);
    CurveData cd = periods::compute_periods(bs);
    const Eigen::MatrixXcd tau = cd.tau_period;
    CHECK((tau - tau.transpose()).norm() / tau.norm() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tau.imag());
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("quintic curve: symmetry under the order-5 rotation of branch points") {
  const auto bs = quintic_roots_plus_infinity();
  CurveData cd = periods::analyze_curve(bs);

  // rotate the branch set by a fifth root of unity (permutes the set)
  std::vector<SpherePoint> rotated;
  for (const auto& p : bs.points)
    rotated.push_back(p.is_infinity()
                          ? SpherePoint::infinity()
                          : SpherePoint::finite(p.value() * std::polar(1.0, 2.0 * kPi / 5.0)));
  CurveData cd_rot = periods::analyze_curve(branch::validate_branch_set(rotated, 2));

  CHECK(std::abs(cd.gram.determinant() - cd_rot.gram.determinant()) <
        1e-8 * std::abs(cd.gram.determinant()));
  const Eigen::MatrixXcd tau = cd.tau_period;
  CHECK((tau - tau.transpose()).norm() / tau.norm() < 1e-8);
}

TEST_CASE("gram matrix is positive definite and correctly orthonormalized") {
  std::mt19937 rng(1357);
  for (int h = 1; h <= 3; ++h) {
    const auto bs = testsupport::random_branch_set(rng, h, false);
    CurveData cd = periods::analyze_curve(bs);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cd.gram);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    const Eigen::MatrixXcd resid =
        cd.ortho.adjoint() * cd.gram * cd.ortho - Eigen::MatrixXcd::Identity(h, h);
    CHECK(resid.norm() < 1e-10);

    if (h == 1) {
      CHECK(std::abs(std::norm(cd.ortho(0, 0)) * cd.gram(0, 0).real() - 1.0) < 1e-12);
      // the inner product equals the area of the period lattice
      const cplx a = cd.A(0, 0), b = cd.B(0, 0);
      CHECK(std::abs(cd.gram(0, 0).real() - std::abs((std::conj(a) * b).imag())) <
            1e-10 * std::abs(cd.gram(0, 0)));
    }
  }
}

TEST_CASE("gram spectrum is invariant under affine input changes") {
  std::mt19937 rng(8642);
  const auto bs = testsupport::random_branch_set(rng, 2, false);
  CurveData cd = periods::analyze_curve(bs);

  const cplx scale = std::polar(2.3, 0.7);
  const cplx offset(0.4, -1.1);
  std::vector<SpherePoint> moved;
  for (const auto& p : bs.points) moved.push_back(SpherePoint::finite(scale * p.value() + offset));
  CurveData cd2 = periods::analyze_curve(branch::validate_branch_set(moved, 2));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(cd.gram), e2(cd2.gram);
  CHECK((e1.eigenvalues() - e2.eigenvalues()).norm() < 1e-8 * e1.eigenvalues().norm());
}

TEST_CASE("canonical density: positivity and basis independence") {
  std::mt19937 rng(11);
  const auto bs = testsupport::random_branch_set(rng, 2, false);
  CurveData cd = periods::analyze_curve(bs);

  std::uniform_real_distribution<double> unit(-0.9, 0.9);
  for (int rep = 0; rep < 25; ++rep) {
    const cplx xi(unit(rng), unit(rng));
    double dmin = 1e300;
    for (const cplx& r : cd.work_points) dmin = std::min(dmin, std::abs(xi - r));
    if (dmin < 1e-3) continue;
    const double rho = periods::canonical_density(cd, xi, 0);
    CHECK(rho > 0.0);
    CHECK(rho == periods::canonical_density(cd, xi, 1));
  }

  // replace the orthonormal basis by a random unitary rotation of itself
  CurveData cd_rot = cd;
  const double th = 0.83;
  Eigen::MatrixXcd U(2, 2);
  U << cplx(std::cos(th), 0.0), cplx(std::sin(th), 0.2), cplx(-std::sin(th), 0.2),
      cplx(std::cos(th), 0.0);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(U);
  U = qr.householderQ();
  cd_rot.ortho = cd.ortho * U;
  for (int rep = 0; rep < 10; ++rep) {
    const cplx xi(unit(rng), unit(rng));
    double dmin = 1e300;
    for (const cplx& r : cd.work_points) dmin = std::min(dmin, std::abs(xi - r));
    if (dmin < 1e-3) continue;
    CHECK(std::abs(periods::canonical_density(cd_rot, xi, 0) -
                   periods::canonical_density(cd, xi, 0)) <
          1e-12 + 1e-10 * periods::canonical_density(cd, xi, 0));
  }
}

TEST_CASE("near-degenerate configurations are rejected") {
  const auto bs = branch::validate_branch_set(
      {SpherePoint::finite(0.0), SpherePoint::finite(cplx(1e-12, 0.0)), SpherePoint::finite(1.0),
       SpherePoint::finite(cplx(0.0, 1.0)), SpherePoint::finite(cplx(2.0, 1.0)),
       SpherePoint::finite(cplx(1.0, -1.0))},
      2);
  CHECK_THROWS_AS((void)periods::compute_periods(bs), Error);
}

TEST_CASE("frame map round-trips") {
  std::mt19937 rng(77);
  const auto bs = testsupport::random_branch_set(rng, 2, true);
  CurveData cd = periods::compute_periods(bs);
  for (std::size_t i = 0; i < bs.points.size(); ++i) {
    const cplx xi = cd.frame.to_work(bs.points[i]);
    CHECK(std::abs(xi - cd.work_points[i]) < 1e-12);
    if (!bs.points[i].is_infinity()) {
      CHECK(std::abs(cd.frame.from_work(xi) - bs.points[i].value()) <
            1e-9 * std::max(1.0, std::abs(bs.points[i].value())));
    }
  }
}
