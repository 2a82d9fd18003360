#include "lgsq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lgsq/errors.hpp"
#include "lgsq/quadrature.hpp"

namespace lgsq::oracle {
namespace {

const cplx I(0.0, 1.0);

struct Pair {
  cplx za;   // exp(2i phi_a) tanh r_a
  cplx zb;
  double ta;
  double tb;
  double cha;
  double chb;
};

Pair pair_of(const SqueezeParams& a, const SqueezeParams& b) {
  return {a.z(), b.z(), std::tanh(a.r()), std::tanh(b.r()), std::cosh(a.r()), std::cosh(b.r())};
}

void require_regular(cplx det, double threshold) {
  if (!(std::abs(det) > threshold)) {
    throw SingularConfiguration("|det M| = " + std::to_string(std::abs(det)) +
                                " is below the singular threshold");
  }
}

// Psi_a^* Psi_b <Qt|U_a U_b^dagger|Qb> collapsed into pref * exp(ct Qt^2 + cb Qb^2 + cx Qt Qb).
// Each coefficient is the sum of the wave-function exponents, the -Q^2/2 factors
// and the explicit quadratic form; no kernel-module formula is involved.
struct Collapsed {
  cplx pref;
  cplx ct;
  cplx cb;
  cplx cx;
};

Collapsed collapse(const SqueezeParams& a, const SqueezeParams& b, double threshold) {
  const Pair p = pair_of(a, b);
  const cplx det = det_M_closed(a, b);
  require_regular(det, threshold);
  const QuadraticForm f = jmj_explicit(a, b);
  const cplx wa = (1.0 + p.za) / (1.0 - p.za);
  const cplx wb = (1.0 + p.zb) / (1.0 - p.zb);
  Collapsed c;
  c.pref = 8.0 / kPi / (p.cha * p.chb) / std::conj(std::sqrt(1.0 - p.za)) / std::sqrt(1.0 - p.zb) /
           std::sqrt(det);
  c.ct = -0.5 * std::conj(wa) - 0.5 + f.qt2;
  c.cb = -0.5 * wb - 0.5 + f.qb2;
  c.cx = f.cross;
  return c;
}

int bin_sign(long long n) { return (n % 2 == 0) ? 1 : -1; }

}  // namespace

cplx wavefunction(const SqueezeParams& p, double Q) {
  const cplx z = p.z();
  const cplx w = (1.0 + z) / (1.0 - z);
  return std::pow(kPi, -0.25) / std::sqrt(std::cosh(p.r())) / std::sqrt(1.0 - z) *
         std::exp(-0.5 * w * Q * Q);
}

MMatrix build_M(const SqueezeParams& a, const SqueezeParams& b) {
  const Pair p = pair_of(a, b);
  const cplx za_bar = std::conj(p.za);
  const cplx zb_bar = std::conj(p.zb);
  MMatrix M = MMatrix::Zero();
  auto set = [&M](int i, int j, cplx v) {
    M(i - 1, j - 1) = v;
    M(j - 1, i - 1) = v;
  };
  set(1, 1, 2.0 - za_bar - p.zb);
  set(1, 2, -I * za_bar + I * p.zb);
  set(1, 3, -1.0 / p.chb);
  set(1, 4, -I / p.chb);
  set(1, 5, -1.0 / p.cha);
  set(1, 6, I / p.cha);
  set(2, 2, 2.0 + za_bar + p.zb);
  set(2, 3, I / p.chb);
  set(2, 4, -1.0 / p.chb);
  set(2, 5, -I / p.cha);
  set(2, 6, -1.0 / p.cha);
  set(3, 3, 3.0 + zb_bar);
  set(3, 4, -I + I * zb_bar);
  set(4, 4, 1.0 - zb_bar);
  set(5, 5, 3.0 + p.za);
  set(5, 6, I - I * p.za);
  set(6, 6, 1.0 - p.za);
  return M;
}

SourceVector source_vector(double Qt, double Qb) {
  SourceVector J;
  J << 0.0, 0.0, Qb, -I * Qb, Qt, I * Qt;
  return -std::sqrt(2.0) * J;
}

cplx det_M_closed(const SqueezeParams& a, const SqueezeParams& b) {
  const double ta = std::tanh(a.r());
  const double tb = std::tanh(b.r());
  const double bracket = std::sin(2.0 * a.phi()) * ta - std::sin(2.0 * b.phi()) * tb -
                         std::sin(2.0 * a.phi() - 2.0 * b.phi()) * ta * tb;
  return -128.0 * I * bracket;
}

cplx det_M_numeric(const SqueezeParams& a, const SqueezeParams& b) {
  return build_M(a, b).partialPivLu().determinant();
}

QuadraticForm jmj_explicit(const SqueezeParams& a, const SqueezeParams& b) {
  const Pair p = pair_of(a, b);
  const cplx det = det_M_closed(a, b);
  const cplx mixed = std::polar(p.ta * p.tb, 2.0 * a.phi() - 2.0 * b.phi());
  QuadraticForm f;
  f.qb2 = -64.0 / det * (1.0 - std::conj(p.za) + std::conj(p.zb) - mixed);
  f.qt2 = -64.0 / det * (1.0 + p.za - p.zb - mixed);
  f.cross = 128.0 / det / (p.cha * p.chb);
  return f;
}

cplx jmj_numeric(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb) {
  const SourceVector J = source_vector(Qt, Qb);
  const SourceVector x = build_M(a, b).fullPivLu().solve(J);
  return 0.5 * (J.transpose() * x)(0, 0);
}

cplx matrix_element(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb,
                    double singular_threshold) {
  const cplx det = det_M_closed(a, b);
  require_regular(det, singular_threshold);
  const double cha = std::cosh(a.r());
  const double chb = std::cosh(b.r());
  const QuadraticForm f = jmj_explicit(a, b);
  return 8.0 / std::sqrt(kPi) / std::sqrt(cha * chb) / std::sqrt(det) *
         std::exp(-0.5 * Qt * Qt - 0.5 * Qb * Qb + f(Qt, Qb));
}

cplx integrand(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb,
               double singular_threshold) {
  return std::conj(wavefunction(a, Qt)) * wavefunction(b, Qb) *
         matrix_element(a, b, Qt, Qb, singular_threshold);
}

double oracle_correlator(const SqueezeParams& a, const SqueezeParams& b, double ell,
                         const ToleranceConfig& tol) {
  tol.validate();
  if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidParameter("ell must be positive and finite");
  const Collapsed c = collapse(a, b, tol.singular_threshold);

  // Envelope |pref| exp(Re q). Points with Re q below `cut` contribute less than
  // 1e-18 each and are dropped.
  const double a11 = c.ct.real();
  const double a22 = c.cb.real();
  const double a12 = c.cx.real();
  if (!(a11 < 0.0 && a22 < 0.0 && 4.0 * a11 * a22 - a12 * a12 > 0.0)) {
    throw ConvergenceFailure("oracle integrand is not Gaussian-decaying");
  }
  const double cut = std::log(1e-18 / std::abs(c.pref));
  const double marginal = a11 - a12 * a12 / (4.0 * a22);  // max_y Re q(x, y) = marginal x^2
  const double x_max = std::sqrt(cut / marginal);
  const long long n_lo = static_cast<long long>(std::floor(-x_max / ell));
  const long long n_hi = static_cast<long long>(std::floor(x_max / ell));
  if (n_hi - n_lo + 1 > tol.max_terms) {
    throw ConvergenceFailure("oracle needs " + std::to_string(n_hi - n_lo + 1) +
                             " cells per axis, above max_terms");
  }

  auto point = [&c](double x, double y) {
    return c.pref * std::exp(c.ct * x * x + c.cb * y * y + c.cx * x * y);
  };
  const double inner_abs = 1e-15;
  const double outer_abs = 1e-13;
  const double rel = std::min(tol.quadrature_rel_tol, 1e-10);

  // F(x) = sum_m (-1)^m \int_{cell m} integrand(x, y) dy over the y-slice where Re q >= cut.
  auto row = [&](double x) -> cplx {
    // a22 y^2 + a12 x y + a11 x^2 - cut >= 0.
    const double disc = a12 * a12 * x * x - 4.0 * a22 * (a11 * x * x - cut);
    if (disc <= 0.0) return 0.0;
    const double centre = -a12 * x / (2.0 * a22);
    const double half = std::sqrt(disc) / (-2.0 * a22);
    const double y0 = centre - half;
    const double y1 = centre + half;
    cplx sum = 0.0;
    const long long m_lo = static_cast<long long>(std::floor(y0 / ell));
    const long long m_hi = static_cast<long long>(std::floor(y1 / ell));
    for (long long m = m_lo; m <= m_hi; ++m) {
      const double lo = std::max(y0, static_cast<double>(m) * ell);
      const double hi = std::min(y1, static_cast<double>(m + 1) * ell);
      if (!(hi > lo)) continue;
      const auto est = quad::gauss_kronrod([&](double y) { return point(x, y); }, lo, hi,
                                           inner_abs, rel);
      sum += static_cast<double>(bin_sign(m)) * est.value;
    }
    return sum;
  };

  double total = 0.0;
  double comp = 0.0;  // Kahan compensation over cells
  for (long long n = n_lo; n <= n_hi; ++n) {
    const double lo = std::max(-x_max, static_cast<double>(n) * ell);
    const double hi = std::min(x_max, static_cast<double>(n + 1) * ell);
    if (!(hi > lo)) continue;
    const auto est = quad::gauss_kronrod(row, lo, hi, outer_abs, rel);
    const double term = bin_sign(n) * est.value.real() - comp;
    const double next = total + term;
    comp = (next - total) - term;
    total = next;
  }
  return total;
}

double zero_angle_overlap(double s_a, double s_b, double ell, const ToleranceConfig& tol) {
  tol.validate();
  if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidParameter("ell must be positive and finite");
  if (!std::isfinite(s_a) || !std::isfinite(s_b)) throw InvalidParameter("scales must be finite");
  const SqueezeParams pa(std::abs(s_a), s_a >= 0.0 ? 0.0 : kPi / 2);
  const double ratio = std::exp(s_a - s_b);
  // |Psi_a|^2 ~ exp(-e^{2 s_a} Q^2); erfc(6.5) is below 1e-18.
  const double x_max = 6.5 * std::exp(-s_a);
  auto sgn = [ell](double x) { return bin_sign(static_cast<long long>(std::floor(x / ell))); };

  std::vector<double> cuts{-x_max, x_max};
  const auto n_lo = static_cast<long long>(std::floor(-x_max / ell));
  const auto k_lo = static_cast<long long>(std::floor(-x_max * ratio / ell));
  if (2 * (-n_lo) + 2 * (-k_lo) > 8LL * tol.max_terms) {
    throw ConvergenceFailure("overlap integral needs too many sign breakpoints");
  }
  for (long long n = n_lo; n <= -n_lo; ++n) cuts.push_back(static_cast<double>(n) * ell);
  for (long long k = k_lo; k <= -k_lo; ++k) cuts.push_back(static_cast<double>(k) * ell / ratio);
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(cuts[i], -x_max);
    const double hi = std::min(cuts[i + 1], x_max);
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    const int sign = sgn(mid) * sgn(ratio * mid);
    const auto est = quad::gauss_kronrod(
        [&pa](double q) { return cplx(std::norm(wavefunction(pa, q)), 0.0); }, lo, hi, 1e-16,
        std::min(tol.quadrature_rel_tol, 1e-12));
    const double term = sign * est.value.real() - comp;
    const double next = total + term;
    comp = (next - total) - term;
    total = next;
  }
  return total;
}

std::vector<FixtureCase> random_fixture_cases(std::uint64_t seed, int count, double min_det) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r_dist(0.0, 2.0);
  std::uniform_real_distribution<double> phi_dist(-kPi / 2, kPi / 2);
  std::uniform_real_distribution<double> q_dist(-3.0, 3.0);
  std::vector<FixtureCase> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const SqueezeParams a(r_dist(rng), phi_dist(rng));
    const SqueezeParams b(r_dist(rng), phi_dist(rng));
    const double qt = q_dist(rng);
    const double qb = q_dist(rng);
    if (std::abs(det_M_closed(a, b)) < min_det) continue;
    out.push_back({a, b, qt, qb});
  }
  return out;
}

nlohmann::json dump_fixtures(const std::vector<FixtureCase>& cases) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& fc : cases) {
    const cplx me = matrix_element(fc.a, fc.b, fc.Qt, fc.Qb);
    arr.push_back({{"a", {{"r", fc.a.r()}, {"phi", fc.a.phi()}}},
                   {"b", {{"r", fc.b.r()}, {"phi", fc.b.phi()}}},
                   {"Qt", fc.Qt},
                   {"Qb", fc.Qb},
                   {"matrix_element_re", me.real()},
                   {"matrix_element_im", me.imag()}});
  }
  return arr;
}

}  // namespace lgsq::oracle
