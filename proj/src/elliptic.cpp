#include "hypgreen/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace hypgreen::elliptic {

namespace {

constexpr int kMaxThetaTerms = 4000;

void require_upper_half(cplx tau) {
  if (!(tau.imag() > 0.0)) throw Error(errc::bad_modulus, "modulus must satisfy Im(tau) > 0");
}

// Coefficients 2 (-1)^n q^{(n+1/2)^2} of the sine series, truncated once the
// term bound for arguments with |Im z| <= im_bound falls below 1e-15 of the
// partial sum.
std::vector<cplx> theta1_coefficients(cplx tau, double im_bound) {
  const cplx ipi(0.0, kPi);
  std::vector<cplx> c;
  double sum_bound = 0.0;
  for (int n = 0; n < kMaxThetaTerms; ++n) {
    const double half = n + 0.5;
    cplx coef = 2.0 * std::exp(ipi * tau * (half * half));
    if (n % 2 == 1) coef = -coef;
    c.push_back(coef);
    const double term_bound = std::abs(coef) * std::exp((2.0 * n + 1.0) * im_bound);
    sum_bound = std::max(sum_bound, term_bound);
    if (n >= 1 && term_bound < 1e-16 * std::max(sum_bound, 1e-300)) break;
  }
  return c;
}

// Sum of c_n sin((2n+1) z) via powers of exp(i z).
cplx theta1_series(cplx z, const std::vector<cplx>& c) {
  const cplx E = std::exp(cplx(0.0, 1.0) * z);
  const cplx Einv = 1.0 / E;
  const cplx E2 = E * E, Einv2 = Einv * Einv;
  cplx P = E, Pi = Einv;
  cplx sum(0.0, 0.0);
  const cplx half_over_i(0.0, -0.5);  // 1/(2i)
  for (const cplx& coef : c) {
    sum += coef * ((P - Pi) * half_over_i);
    P *= E2;
    Pi *= Einv2;
  }
  return sum;
}

// theta1 in the lattice-coordinate convention at a reduced argument,
// |Im u| <= Im(tau)/2 assumed.
cplx theta1_reduced(cplx u, cplx tau) {
  const auto c = theta1_coefficients(tau, kPi * std::abs(u.imag()));
  return theta1_series(kPi * u, c);
}

}  // namespace

Torus make_torus(cplx tau) {
  require_upper_half(tau);
  return Torus{tau};
}

TorusPoint reduce_point(cplx z, const Torus& t) {
  const double b = z.imag() / t.tau.imag();
  cplx w = z - std::floor(b) * t.tau;
  w -= std::floor(w.real());
  if (w.real() >= 1.0) w -= 1.0;  // guard against floor rounding at the edge
  return TorusPoint{w};
}

cplx theta1(cplx z, cplx tau) {
  require_upper_half(tau);
  const int m = static_cast<int>(std::lround(z.imag() / tau.imag()));
  const cplx zr = z - static_cast<double>(m) * tau;
  cplx val = theta1_reduced(zr, tau);
  if (m != 0) {
    // theta1(z + m tau) = (-1)^m e^{-i pi m^2 tau} e^{-2 pi i m z'} theta1(z')
    const cplx ipi(0.0, kPi);
    cplx factor = std::exp(-ipi * tau * static_cast<double>(m) * static_cast<double>(m) -
                           cplx(0.0, 2.0 * kPi * m) * zr);
    if (m % 2 != 0) factor = -factor;
    val *= factor;
  }
  return val;
}

cplx theta1_dz(cplx z, cplx tau) {
  require_upper_half(tau);
  const cplx ipi(0.0, kPi);
  cplx sum(0.0, 0.0);
  for (int n = 0; n < kMaxThetaTerms; ++n) {
    const double half = n + 0.5;
    cplx coef = 2.0 * kPi * std::exp(ipi * tau * (half * half)) * (2.0 * n + 1.0);
    if (n % 2 == 1) coef = -coef;
    const cplx term = coef * std::cos((2.0 * n + 1.0) * kPi * z);
    sum += term;
    if (n >= 2 && std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

cplx theta1_dzz(cplx z, cplx tau) {
  require_upper_half(tau);
  const cplx ipi(0.0, kPi);
  cplx sum(0.0, 0.0);
  for (int n = 0; n < kMaxThetaTerms; ++n) {
    const double half = n + 0.5;
    const double odd = 2.0 * n + 1.0;
    cplx coef = -2.0 * kPi * kPi * std::exp(ipi * tau * (half * half)) * odd * odd;
    if (n % 2 == 1) coef = -coef;
    const cplx term = coef * std::sin(odd * kPi * z);
    sum += term;
    if (n >= 2 && std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

double theta1_log_abs(cplx u, cplx tau) {
  require_upper_half(tau);
  const int m = static_cast<int>(std::lround(u.imag() / tau.imag()));
  const cplx ur = u - static_cast<double>(m) * tau;
  const cplx val = theta1_reduced(ur, tau);
  double out = std::log(std::abs(val));
  if (m != 0) out += kPi * tau.imag() * m * m + 2.0 * kPi * m * ur.imag();
  return out;
}

ThetaConstants theta_constants(cplx tau) {
  require_upper_half(tau);
  const cplx ipi(0.0, kPi);
  cplx t2(0.0), t3(1.0), t4(1.0);
  for (int n = 0; n < kMaxThetaTerms; ++n) {
    const double half = n + 0.5;
    const cplx qh = std::exp(ipi * tau * (half * half));
    t2 += 2.0 * qh;
    const double k = n + 1.0;
    const cplx qs = std::exp(ipi * tau * (k * k));
    t3 += 2.0 * qs;
    t4 += (static_cast<int>(k) % 2 == 0 ? 2.0 : -2.0) * qs;
    if (std::abs(qs) < 1e-18 && std::abs(qh) < 1e-18) break;
  }
  return ThetaConstants{t2, t3, t4};
}

ReducedModulus reduce_modulus(cplx tau0) {
  require_upper_half(tau0);
  // Track the integer matrix (a b; c d) with tau = (a tau0 + b)/(c tau0 + d).
  long long a = 1, b = 0, c = 0, d = 1;
  cplx tau = tau0;
  for (int iter = 0; iter < 256; ++iter) {
    const long long n = std::llround(tau.real());
    if (n != 0) {
      tau -= static_cast<double>(n);
      a -= n * c;
      b -= n * d;
    }
    if (std::abs(tau) < 1.0 - 1e-15) {
      tau = -1.0 / tau;
      // apply S = (0 -1; 1 0) on the left: (a b; c d) -> (-c -d; a b)
      const long long na = -c, nb = -d, nc = a, nd = b;
      a = na;
      b = nb;
      c = nc;
      d = nd;
    } else {
      break;
    }
  }
  // Recompute from the accumulated matrix to avoid drift.
  const cplx gamma = static_cast<double>(c) * tau0 + static_cast<double>(d);
  const cplx tau_exact = (static_cast<double>(a) * tau0 + static_cast<double>(b)) / gamma;
  return ReducedModulus{tau_exact, gamma};
}

namespace {

// Integral of sigma * w(sigma) * log(sigma) over [0,1] for the C^3 cutoff
// w = 1 - (35 s^4 - 84 s^5 + 70 s^6 - 20 s^7), by termwise closed form.
double cutoff_log_moment() {
  const double coef[] = {1.0, -35.0, 84.0, -70.0, 20.0};
  const int pw[] = {1, 5, 6, 7, 8};
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += coef[i] * (-1.0 / ((pw[i] + 1.0) * (pw[i] + 1.0)));
  return acc;
}

double cutoff(double s) {
  if (s >= 1.0) return 0.0;
  const double s2 = s * s;
  const double s4 = s2 * s2;
  return 1.0 - s4 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s2 * s);
}

// One midpoint pass over the fundamental cell for the mean of
// F(u) = log|theta1(u)| - pi Im(u)^2 / Im(tau), with the smooth subtraction
// of the logarithmic singularity near the cell corner.
double mean_pass(cplx tau, int n, double r0) {
  const double imt = tau.imag();
  const cplx ipi(0.0, kPi);
  double total = 0.0;
  for (int jt = 0; jt < n; ++jt) {
    const double t = (jt + 0.5) / n;
    const int m = (t > 0.5) ? 1 : 0;
    const double tm = t - m;
    const double im_u = tm * imt;  // Im of the reduced argument, fixed per row
    const double row_shift = (m != 0) ? kPi * imt * m * m + 2.0 * kPi * m * im_u : 0.0;
    const auto coefs = theta1_coefficients(tau, kPi * std::abs(im_u));
    // E = exp(i pi (s + tm tau)) advanced by exp(i pi / n) along the row
    cplx E = std::exp(ipi * (0.5 / n + tm * tau));
    const cplx step = std::exp(ipi * (1.0 / n));
    const double flat_term = kPi * t * t * imt;
    const double t_tilde = t - std::lround(t);
    for (int js = 0; js < n; ++js) {
      const cplx Einv = 1.0 / E;
      const cplx E2 = E * E, Einv2 = Einv * Einv;
      cplx P = E, Pi = Einv;
      cplx sum(0.0, 0.0);
      const cplx half_over_i(0.0, -0.5);
      for (const cplx& coef : coefs) {
        sum += coef * ((P - Pi) * half_over_i);
        P *= E2;
        Pi *= Einv2;
      }
      double F = std::log(std::abs(sum)) + row_shift - flat_term;
      const double s = (js + 0.5) / n;
      const double s_tilde = s - std::lround(s);
      const cplx up = s_tilde + t_tilde * tau;
      const double rho = std::abs(up);
      if (rho < r0) F -= cutoff(rho / r0) * std::log(rho / r0);
      total += F;
      E *= step;
    }
  }
  return total / (static_cast<double>(n) * n);
}

}  // namespace

double mean_zero_constant(cplx tau) {
  require_upper_half(tau);
  if (tau.imag() < 0.8)
    throw Error(errc::bad_modulus, "mean_zero_constant expects a reduced modulus");

  static std::mutex mtx;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({tau.real(), tau.imag()});
    if (it != cache.end()) return it->second;
  }

  const double r0 = 0.4;
  const double analytic = 2.0 * kPi * r0 * r0 / tau.imag() * cutoff_log_moment();
  double prev = mean_pass(tau, 32, r0) + analytic;
  double value = prev;
  for (int n = 64; n <= 2048; n *= 2) {
    value = mean_pass(tau, n, r0) + analytic;
    if (std::abs(value - prev) < 1e-9) break;
    prev = value;
  }
  const double c = -value;
  {
    std::lock_guard<std::mutex> lock(mtx);
    cache[{tau.real(), tau.imag()}] = c;
  }
  return c;
}

double torus_green(const TorusPoint& p, const Torus& t) {
  require_upper_half(t.tau);
  const ReducedModulus rm = reduce_modulus(t.tau);
  const cplx z = p.z / rm.gamma;
  const TorusPoint zr = reduce_point(z, Torus{rm.tau});
  double min_dist = std::abs(zr.z);
  for (const cplx corner : {cplx(1.0, 0.0), rm.tau, 1.0 + rm.tau})
    min_dist = std::min(min_dist, std::abs(zr.z - corner));
  if (min_dist < 1e-13 * (1.0 + std::abs(rm.tau)))
    throw Error(errc::origin_singularity, "Green's function evaluated at its source");
  const double imt = rm.tau.imag();
  return theta1_log_abs(zr.z, rm.tau) - kPi * zr.z.imag() * zr.z.imag() / imt +
         mean_zero_constant(rm.tau);
}

double torsion_energy(const Torus& t, int N) {
  if (N < 1) throw Error(errc::index_out_of_range, "torsion order must be >= 1");
  double sum = 0.0;
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      if (a == 0 && b == 0) continue;
      const cplx z =
          (static_cast<double>(a) + static_cast<double>(b) * t.tau) / static_cast<double>(N);
      sum += torus_green(TorusPoint{z}, t);
    }
  }
  return sum;
}

namespace {

cplx complex_agm(cplx a, cplx b) {
  for (int iter = 0; iter < 128; ++iter) {
    const cplx a1 = 0.5 * (a + b);
    cplx b1 = std::sqrt(a * b);
    if (std::abs(a1 - b1) > std::abs(a1 + b1)) b1 = -b1;
    a = a1;
    b = b1;
    if (std::abs(a - b) <= 1e-15 * std::abs(a)) break;
  }
  return 0.5 * (a + b);
}

std::array<cplx, 6> anharmonic_orbit(cplx l) {
  return {l, 1.0 - l, 1.0 / l, 1.0 / (1.0 - l), l / (l - 1.0), (l - 1.0) / l};
}

// Standard region used before AGM inversion: |l| <= 1, |1-l| <= 1, Re l <= 1/2.
cplx reduce_lambda(cplx l) {
  const auto orbit = anharmonic_orbit(l);
  double best_score = 1e300;
  cplx best = l;
  for (const cplx& cand : orbit) {
    const double score =
        std::max({std::abs(cand) - 1.0, std::abs(1.0 - cand) - 1.0, cand.real() - 0.5});
    const bool better =
        score < best_score - 1e-14 ||
        (std::abs(score - best_score) <= 1e-14 &&
         (cand.real() < best.real() - 1e-14 ||
          (std::abs(cand.real() - best.real()) <= 1e-14 && cand.imag() < best.imag())));
    if (better) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

// Half-period values of the Weierstrass function up to a common additive
// constant; the constant cancels in the affine matching below.
std::array<cplx, 3> half_period_values(cplx tau) {
  std::array<cplx, 3> e;
  const std::array<cplx, 3> hp = {cplx(0.5, 0.0), 0.5 * tau, 0.5 * (1.0 + tau)};
  for (int k = 0; k < 3; ++k) {
    const cplx t0 = theta1(hp[k], tau);
    const cplx t1 = theta1_dz(hp[k], tau);
    const cplx t2 = theta1_dzz(hp[k], tau);
    e[k] = -(t2 * t0 - t1 * t1) / (t0 * t0);
  }
  return e;
}

}  // namespace

BranchTorusData tau_from_branch(const branch::BranchSet& bs) {
  if (bs.genus != 1) throw Error(errc::not_genus_one, "tau_from_branch requires genus 1");

  branch::BranchSet work = bs;
  int inf_slot = work.infinity_index();
  if (inf_slot < 0) {
    const cplx pivot = work.points[3].value();
    branch::MobiusMap m{cplx(0.0), cplx(1.0), cplx(1.0), -pivot};
    work = branch::apply_mobius(work, m);
    inf_slot = 3;
  }
  std::array<int, 3> finite_idx{};
  int nf = 0;
  for (int i = 0; i < 4; ++i)
    if (i != inf_slot) finite_idx[nf++] = i;
  const cplx a0 = work.points[finite_idx[0]].value();
  const cplx a1 = work.points[finite_idx[1]].value();
  const cplx a2 = work.points[finite_idx[2]].value();

  const cplx lambda = (a2 - a0) / (a1 - a0);
  if (std::abs(lambda) < 1e-12 || std::abs(lambda - 1.0) < 1e-12)
    throw Error(errc::not_genus_one, "degenerate Legendre parameter");

  const cplx lred = reduce_lambda(lambda);
  const cplx k = std::sqrt(lred);
  const cplx kp = std::sqrt(1.0 - lred);
  cplx tau = cplx(0.0, 1.0) * complex_agm(cplx(1.0), kp) / complex_agm(cplx(1.0), k);
  if (!(tau.imag() > 0.0))
    throw Error(errc::solver_failure, "AGM produced a non-upper-half modulus");

  // lambda(tau) = (theta2/theta3)^4 must reproduce the reduced parameter.
  {
    const ThetaConstants tc = theta_constants(tau);
    const cplx ratio = tc.t2 / tc.t3;
    const cplx lam_check = ratio * ratio * ratio * ratio;
    if (std::abs(lam_check - lred) > 1e-8 * std::max(1.0, std::abs(lred)))
      throw Error(errc::solver_failure, "theta-constant check of the AGM modulus failed");
  }

  tau = reduce_modulus(tau).tau;

  // Match the finite branch points to the three half-periods by the shape of
  // their affine triples.
  const std::array<cplx, 3> e = half_period_values(tau);
  const std::array<cplx, 3> hp = {cplx(0.5, 0.0), 0.5 * tau, 0.5 * (1.0 + tau)};
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  int best_perm = -1;
  double best_err = 1e300;
  for (int p = 0; p < 6; ++p) {
    const cplx shape = (e[perms[p][2]] - e[perms[p][0]]) / (e[perms[p][1]] - e[perms[p][0]]);
    const double err = std::abs(shape - lambda);
    if (err < best_err) {
      best_err = err;
      best_perm = p;
    }
  }
  if (best_err > 1e-6 * std::max(1.0, std::abs(lambda)))
    throw Error(errc::solver_failure, "half-period correspondence did not match");

  BranchTorusData out;
  out.tau = tau;
  out.infinity_slot = inf_slot;
  out.lambda = lambda;
  out.u[inf_slot] = cplx(0.0, 0.0);
  for (int m = 0; m < 3; ++m) out.u[finite_idx[m]] = hp[perms[best_perm][m]];
  return out;
}

WeierstrassGreenValue elliptic_weierstrass_green(const branch::BranchSet& bs, int i, int j) {
  if (bs.genus != 1) throw Error(errc::not_genus_one, "requires genus 1");
  if (i < 0 || i >= 4 || j < 0 || j >= 4)
    throw Error(errc::index_out_of_range, "branch index out of range");
  if (i == j) throw Error(errc::equal_indices, "requires i != j");
  const int inf_slot = bs.infinity_index();
  if (inf_slot < 0)
    throw Error(errc::not_genus_one, "closed form requires a branch set containing infinity");
  if (i == inf_slot || j == inf_slot)
    throw Error(errc::index_out_of_range, "closed form applies to the finite branch indices");

  const BranchTorusData data = tau_from_branch(bs);
  const Torus torus{data.tau};
  const double value = torus_green(TorusPoint{data.u[i] - data.u[j]}, torus);

  int k = -1;
  for (int m = 0; m < 4; ++m)
    if (m != i && m != j && m != inf_slot) k = m;
  const cplx ai = bs.points[i].value(), aj = bs.points[j].value(), ak = bs.points[k].value();
  const double closed =
      std::log(2.0) / 3.0 + std::log(std::abs(ai - aj) * std::abs(ai - aj) /
                                     (std::abs(ai - ak) * std::abs(aj - ak))) /
                                12.0;
  return WeierstrassGreenValue{value, std::abs(value - closed)};
}

}  // namespace hypgreen::elliptic
