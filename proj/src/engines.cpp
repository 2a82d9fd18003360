#include "lgsq/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lgsq/errors.hpp"
#include "lgsq/quadrature.hpp"
#include "lgsq/special.hpp"

namespace lgsq::engine {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(kPi);

int bin_sign(long long n) { return (n % 2 == 0) ? 1 : -1; }

// Real part of q: a11 x^2 + a22 y^2 + a12 x y, negative definite.
struct Envelope {
  double a11;
  double a22;
  double a12;

  explicit Envelope(const simd::QuadForm& q) : a11(q.ct.real()), a22(q.cb.real()), a12(q.cx.real()) {}

  bool definite() const { return a11 < 0.0 && a22 < 0.0 && 4.0 * a11 * a22 - a12 * a12 > 0.0; }
  double at(double x, double y) const { return a11 * x * x + a22 * y * y + a12 * x * y; }

  // max over y in [y0, y1] of at(x, y).
  double max_over_y(double x, double y0, double y1) const {
    const double y = std::clamp(-a12 * x / (2.0 * a22), y0, y1);
    return at(x, y);
  }
  double max_over_x(double y, double x0, double x1) const {
    const double x = std::clamp(-a12 * y / (2.0 * a11), x0, x1);
    return at(x, y);
  }
  // max over the rectangle: the origin if inside, otherwise the best edge.
  double max_over_rect(double x0, double x1, double y0, double y1) const {
    if (x0 <= 0.0 && 0.0 <= x1 && y0 <= 0.0 && 0.0 <= y1) return 0.0;
    return std::max({max_over_y(x0, y0, y1), max_over_y(x1, y0, y1), max_over_x(y0, x0, x1),
                     max_over_x(y1, x0, x1)});
  }
};

simd::QuadForm form_of(const GaussKernel& k) { return {k.c_tilde, k.c_bar, k.c_cross}; }

// Box [-X, X] x [-Y, Y] outside which \int\int |exp q| <= abs_tol.
struct Box {
  double X;
  double Y;
};

Box truncation_box(const Envelope& e, double abs_tol) {
  // \int_y exp(Re q) dy = sqrt(pi / -a22) exp(-cx x^2), and symmetrically in y.
  const double cx = -(e.a11 - e.a12 * e.a12 / (4.0 * e.a22));
  const double cy = -(e.a22 - e.a12 * e.a12 / (4.0 * e.a11));
  const double sx = std::sqrt(kPi / -e.a22) * kSqrtPi / std::sqrt(cx);
  const double sy = std::sqrt(kPi / -e.a11) * kSqrtPi / std::sqrt(cy);
  return {gaussian_tail_radius(cx, sx, 0.5 * abs_tol), gaussian_tail_radius(cy, sy, 0.5 * abs_tol)};
}

// Cells of width ell covering [-X, X]: edges clipped to the box.
struct Cells {
  long long lo;
  long long hi;  // inclusive
  double ell;
  double half;

  double left(long long n) const { return std::max(-half, static_cast<double>(n) * ell); }
  double right(long long n) const { return std::min(half, static_cast<double>(n + 1) * ell); }
  long long count() const { return hi - lo + 1; }
};

Cells cells_for(double half, double ell) {
  if (half <= 0.0) return {0, -1, ell, 0.0};
  const auto lo = static_cast<long long>(std::floor(-half / ell));
  auto hi = static_cast<long long>(std::ceil(half / ell)) - 1;
  hi = std::max(hi, lo);
  return {lo, hi, ell, half};
}

void check_kernel(const GaussKernel& k, double ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidParameter("ell must be positive and finite");
  if (!Envelope(form_of(k)).definite()) {
    throw InvalidParameter("kernel is not integrable (Re q is not negative definite)");
  }
}

// ---------------------------------------------------------------- fourier

// s(x) = (4/pi) sum_{j odd} sin(j pi x / ell) / j. Each product of sines against
// exp(q) is a Gaussian Fourier transform, giving
//   S = -(8 / (pi sqrt(det P))) sum_{j,k odd > 0} (1/jk) [e^{E(j w, k w)} - e^{E(j w, -k w)}]
// with P = -[[ct, cx/2], [cx/2, cb]], w = pi/ell and
//   E(u, v) = (cb u^2 - cx u v + ct v^2) / (4 det P).
struct FourierPlan {
  bool feasible = false;
  int K = 0;  // largest odd index kept
  double bound = kInf;
  simd::QuadForm exponent{};
  cplx scale{};
};

FourierPlan plan_fourier(const GaussKernel& k, double ell, double abs_tol, int max_terms) {
  FourierPlan plan;
  const cplx ct = k.c_tilde;
  const cplx cb = k.c_bar;
  const cplx cx = k.c_cross;
  const cplx b = -cb;
  const cplx kappa = ct + cx * cx / (4.0 * b);
  const cplx sqrt_det = std::sqrt(b) * std::sqrt(-kappa);  // both factors have Re > 0
  const cplx det = ct * cb - 0.25 * cx * cx;
  const double w = kPi / ell;
  plan.exponent = {cb * w * w / (4.0 * det), ct * w * w / (4.0 * det), -cx * w * w / (4.0 * det)};
  plan.scale = -8.0 / (kPi * sqrt_det);

  // Decay rate: Re E(j w, k w) <= -c (j^2 + k^2).
  const double p = plan.exponent.ct.real();
  const double r = plan.exponent.cb.real();
  const double s = 0.5 * plan.exponent.cx.real();
  const double top = 0.5 * (p + r) + std::sqrt(0.25 * (p - r) * (p - r) + s * s);
  const double c = -top;
  if (!(c > 0.0)) return plan;

  // t_k = exp(-c k^2)/k over odd k; tail T(K) = sum_{k > K} t_k, total A.
  std::vector<double> t;
  const int k_cap = 2 * max_terms + 1;
  for (int kk = 1; kk <= k_cap; kk += 2) {
    const double v = std::exp(-c * kk * kk) / kk;
    t.push_back(v);
    if (v < 1e-300 || (t.size() > 1 && v < 1e-25 * t.front())) break;
  }
  std::vector<double> suffix(t.size() + 1, 0.0);
  for (std::size_t i = t.size(); i-- > 0;) suffix[i] = suffix[i + 1] + t[i];
  const double A = suffix[0];
  const double amp = std::abs(plan.scale) * 4.0 * A;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double bound = amp * suffix[i + 1];
    if (bound <= abs_tol) {
      plan.K = static_cast<int>(2 * i + 1);
      plan.bound = bound;
      plan.feasible = true;
      return plan;
    }
  }
  return plan;
}

SeriesSum run_fourier(const GaussKernel& k, double ell, double abs_tol, int max_terms) {
  const FourierPlan plan = plan_fourier(k, ell, abs_tol, max_terms);
  if (!plan.feasible) {
    throw ConvergenceFailure("Fourier series needs more than max_terms harmonics at ell = " +
                             std::to_string(ell));
  }
  const double w = 1.0;  // harmonics enter through the scaled exponent
  std::vector<double> xs;
  std::vector<double> wx;
  std::vector<double> ys;
  std::vector<double> wy;
  for (int j = 1; j <= plan.K; j += 2) {
    xs.push_back(j * w);
    wx.push_back(1.0 / j);
    ys.push_back(j * w);
    wy.push_back(1.0 / j);
    ys.push_back(-j * w);
    wy.push_back(-1.0 / j);
  }
  const cplx sum = simd::gauss_tensor_sum(plan.exponent, xs, wx, ys, wy);
  SeriesSum out;
  out.value = plan.scale * sum;
  // Truncation bound plus rounding on the 1/(jk)-weighted terms.
  double mass = 0.0;
  for (double v : wx) mass += v;
  out.error = plan.bound + 1e-15 * std::abs(plan.scale) * 2.0 * mass * mass;
  out.evaluations = static_cast<std::int64_t>(xs.size() * ys.size());
  out.engine = Engine::fourier;
  return out;
}

// ------------------------------------------------------------- rectangles

struct Panel {
  double x0;
  double x1;
  double y0;
  double y1;
  int depth;
};

thread_local std::vector<double> tl_xs;
thread_local std::vector<double> tl_wx;
thread_local std::vector<double> tl_ys;
thread_local std::vector<double> tl_wy;

cplx tensor_rule(const simd::QuadForm& q, const quad::GaussRule& rule, const Panel& p) {
  const double cx = 0.5 * (p.x0 + p.x1);
  const double hx = 0.5 * (p.x1 - p.x0);
  const double cy = 0.5 * (p.y0 + p.y1);
  const double hy = 0.5 * (p.y1 - p.y0);
  const std::size_t n = rule.nodes.size();
  tl_xs.resize(n);
  tl_wx.resize(n);
  tl_ys.resize(n);
  tl_wy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tl_xs[i] = cx + hx * rule.nodes[i];
    tl_wx[i] = hx * rule.weights[i];
    tl_ys[i] = cy + hy * rule.nodes[i];
    tl_wy[i] = hy * rule.weights[i];
  }
  return simd::gauss_tensor_sum(q, tl_xs, tl_wx, tl_ys, tl_wy);
}

// Number of initial panels along one axis: enough that |q| changes by at most
// ~3 (phase or log-magnitude) across a panel.
int initial_panels(double lo, double hi, double other_lo, double other_hi, cplx c_self, cplx c_mix) {
  const double w = hi - lo;
  const double xm = std::max(std::abs(lo), std::abs(hi));
  const double ym = std::max(std::abs(other_lo), std::abs(other_hi));
  const double change = (2.0 * std::abs(c_self) * xm + std::abs(c_mix) * ym) * w;
  return static_cast<int>(std::clamp(std::ceil(change / 3.0), 1.0, 4096.0));
}

// Cost of one cell in integrand evaluations (8- and 12-point rules, 208 per panel).
double rect_cell_cost(const simd::QuadForm& q, double x0, double x1, double y0, double y1) {
  const double nx = initial_panels(x0, x1, y0, y1, q.ct, q.cx);
  const double ny = initial_panels(y0, y1, x0, x1, q.cb, q.cx);
  return 208.0 * nx * ny;
}

SeriesSum run_rectangles(const GaussKernel& k, double ell, double abs_tol, double rel_tol,
                         int max_terms) {
  const simd::QuadForm q = form_of(k);
  const Envelope env(q);
  const Box box = truncation_box(env, 0.5 * abs_tol);
  const Cells cx = cells_for(box.X, ell);
  const Cells cy = cells_for(box.Y, ell);
  if (cx.count() > max_terms || cy.count() > max_terms) {
    throw ConvergenceFailure("rectangle series needs more than max_terms cells per axis");
  }
  SeriesSum out;
  out.engine = Engine::rectangles;
  out.error = 0.5 * abs_tol;
  const double n_cells = std::max(1.0, static_cast<double>(cx.count() * cy.count()));
  const double cell_tol = 0.5 * abs_tol / n_cells;
  cplx total = 0.0;
  for (long long n = cx.lo; n <= cx.hi; ++n) {
    const double x0 = cx.left(n);
    const double x1 = cx.right(n);
    if (!(x1 > x0)) continue;
    for (long long m = cy.lo; m <= cy.hi; ++m) {
      const double y0 = cy.left(m);
      const double y1 = cy.right(m);
      if (!(y1 > y0)) continue;
      const double bound = (x1 - x0) * (y1 - y0) * std::exp(env.max_over_rect(x0, x1, y0, y1));
      if (bound <= cell_tol) {
        out.error += bound;
        continue;
      }
      double err = 0.0;
      const cplx v = rectangle_integral(q, x0, x1, y0, y1, rel_tol, cell_tol, 20, &err);
      total += static_cast<double>(bin_sign(n) * bin_sign(m)) * v;
      out.error += err;
      out.evaluations += static_cast<std::int64_t>(rect_cell_cost(q, x0, x1, y0, y1));
    }
  }
  out.value = total;
  return out;
}

// ---------------------------------------------------------- semi-analytic

// With b = -cb, mu = cx/(2b), kappa = ct + b mu^2 and z(x, Y) = sqrt(b)(Y - mu x):
//   \int_{y0}^{y1} exp(q) dy = sqrt(pi)/(2 sqrt b) exp(kappa x^2) [erf z(x, y1) - erf z(x, y0)].
// J(xa, xb; Y) = \int exp(kappa x^2) erf z(x, Y) dx is split where Re z changes sign;
// on each piece erf z = s (1 - exp(-z^2) w(i s z)) with s = sign Re z, so
//   J = s G(kappa; u, v) - s \int_u^v exp(q(x, Y)) w(i s z(x, Y)) dx.
// The remainder is integrated along the real axis, or, when the cross coupling
// dominates (|sqrt(b) mu|^2 >= 16 |kappa|), as P(u) - P(v) with P(x0) the integral
// along the ray on which s z grows along the positive real axis.
class SemiAnalytic {
 public:
  SemiAnalytic(cplx ct, cplx cb, cplx cx, double tol_each)
      : ct_(ct), cb_(cb), cx_(cx), tol_(tol_each) {
    b_ = -cb;
    sb_ = std::sqrt(b_);
    mu_ = cx / (2.0 * b_);
    kappa_ = ct + b_ * mu_ * mu_;
    sbm_ = sb_ * mu_;
    g_ = std::abs(sbm_);
    nu_ = sbm_.real() / sb_.real();
    rays_ = g_ * g_ >= 16.0 * std::abs(kappa_);
  }

  cplx outer_scale() const { return kSqrtPi / (2.0 * sb_); }
  double error() const { return error_; }
  std::int64_t evaluations() const { return evaluations_; }
  double tol() const { return tol_; }
  bool rays() const { return rays_; }

  cplx z(double x, double Y) const { return sb_ * (Y - mu_ * x); }

  // J over [xa, xb] at breakpoint Y.
  cplx J(double xa, double xb, double Y) {
    double split = kInf;
    if (nu_ != 0.0) split = Y / nu_;
    if (xa < split && split < xb) return piece(xa, split, Y) + piece(split, xb, Y);
    return piece(xa, xb, Y);
  }

 private:
  // q(x, Y) = kappa x^2 - z^2; this form avoids the cancellation between the
  // large chirped terms of ct x^2 + cb Y^2 + cx x Y.
  cplx q(cplx x, double Y) const {
    const cplx zz = sb_ * (Y - mu_ * x);
    return kappa_ * x * x - zz * zz;
  }

  cplx piece(double u, double v, double Y) {
    const double s = z(0.5 * (u + v), Y).real() >= 0.0 ? 1.0 : -1.0;
    const cplx smooth = special::gauss_interval(kappa_, u, v);
    const cplx rem = rays_ ? ray(u, Y, s) - ray(v, Y, s) : real_axis(u, v, Y, s);
    return s * (smooth - rem);
  }

  cplx real_axis(double u, double v, double Y, double s) {
    // |w| <= 1 in the closed upper half plane, so |integrand| <= exp(Re q).
    const double a = ct_.real();
    const double xv = std::clamp(-cx_.real() * Y / (2.0 * a), u, v);
    const double peak = q(xv, Y).real();
    const double bound = (v - u) * std::exp(peak);
    if (bound <= tol_) {
      error_ += bound;
      return 0.0;
    }
    const auto est = quad::gauss_kronrod(
        [&](double x) { return std::exp(q(x, Y)) * special::faddeeva_w(cplx(0.0, s) * z(x, Y)); }, u,
        v, tol_, 1e-13, 4000);
    error_ += est.error;
    evaluations_ += est.evaluations;
    return est.value;
  }

  cplx ray(double x0, double Y, double s) {
    const cplx zeta0 = s * z(x0, Y);
    const cplx dir = -s * std::conj(sbm_) / (g_ * g_);  // dx/ds
    const double re_q0 = q(x0, Y).real();
    // Re of the exponent along the ray: re_q0 + L s + C s^2.
    const double L = (2.0 * kappa_ * x0 * dir).real() - 2.0 * zeta0.real();
    const double C = -1.0 + (kappa_ * dir * dir).real();
    const double mass = gaussian_half_line(L, C);
    const double bound = std::exp(re_q0) * mass / g_;
    if (bound <= tol_) {
      error_ += bound;
      return 0.0;
    }
    const double log_eps = std::log(1e-17 * std::min(1.0, tol_ / bound));
    const double s_end = (L + std::sqrt(L * L + 4.0 * C * log_eps)) / (-2.0 * C);
    const auto est = quad::gauss_kronrod(
        [&](double t) {
          const cplx x = x0 + t * dir;
          const cplx zeta = zeta0 + t;
          return std::exp(kappa_ * x * x - zeta * zeta) *
                 special::faddeeva_w(cplx(-zeta.imag(), zeta.real()));
        },
        0.0, s_end, tol_ * g_, 1e-13, 4000);
    error_ += est.error / g_;
    evaluations_ += est.evaluations;
    return dir * est.value;
  }

  // \int_0^inf exp(L s + C s^2) ds for C < 0.
  static double gaussian_half_line(double L, double C) {
    const double a = -C;
    const double t = L / (2.0 * std::sqrt(a));
    // sqrt(pi)/(2 sqrt a) exp(t^2) erfc(-t); for t < 0 the product is the scaled
    // complementary error function erfcx(-t) = w(-i t).
    if (t > 25.0) return kSqrtPi / std::sqrt(a) * std::exp(t * t);
    if (t < 0.0) return kSqrtPi / (2.0 * std::sqrt(a)) * special::faddeeva_w(cplx(0.0, -t)).real();
    return kSqrtPi / (2.0 * std::sqrt(a)) * std::exp(t * t) * std::erfc(-t);
  }

  cplx ct_, cb_, cx_;
  cplx b_, sb_, mu_, kappa_, sbm_;
  double g_ = 0.0;
  double nu_ = 0.0;
  bool rays_ = false;
  double tol_;
  double error_ = 0.0;
  std::int64_t evaluations_ = 0;
};

SeriesSum run_semi(const GaussKernel& k, double ell, double abs_tol, int max_terms) {
  simd::QuadForm qf = form_of(k);
  const Envelope env(qf);
  Box box = truncation_box(env, 0.5 * abs_tol);
  // Integrate analytically over the variable with the stiffer coefficient.
  if (std::abs(qf.ct) > std::abs(qf.cb)) {
    std::swap(qf.ct, qf.cb);
    std::swap(box.X, box.Y);
  }
  const Cells cx = cells_for(box.X, ell);
  const Cells cy = cells_for(box.Y, ell);
  if (cx.count() > max_terms || cy.count() > max_terms) {
    throw ConvergenceFailure("semi-analytic series needs more than max_terms cells per axis");
  }
  SeriesSum out;
  out.engine = Engine::semi_analytic;
  if (cx.count() <= 0 || cy.count() <= 0) {
    out.error = abs_tol;
    return out;
  }

  // Breakpoints y_0 < ... < y_M with cell i = [y_i, y_{i+1}] of sign s_i; the row
  // sum over cells is sum_k J(y_k) (s_{k-1} - s_k) with s_{-1} = s_M = 0.
  std::vector<double> ys;
  std::vector<int> coef;
  const long long M = cy.count();
  for (long long i = 0; i <= M; ++i) {
    const long long m = cy.lo + i;
    ys.push_back(i == M ? cy.right(m - 1) : cy.left(m));
    const int prev = i == 0 ? 0 : bin_sign(m - 1);
    const int cur = i == M ? 0 : bin_sign(m);
    coef.push_back(prev - cur);
  }
  const double evals = static_cast<double>(cx.count() + 1) * static_cast<double>(M + 1) * 4.0;
  const double scale_mag = std::abs(kSqrtPi / (2.0 * std::sqrt(-qf.cb)));
  SemiAnalytic semi(qf.ct, qf.cb, qf.cx, 0.5 * abs_tol / (scale_mag * evals));

  cplx total = 0.0;
  double magnitude = 0.0;
  for (std::size_t kk = 0; kk < ys.size(); ++kk) {
    if (coef[kk] == 0) continue;
    cplx col = 0.0;
    for (long long n = cx.lo; n <= cx.hi; ++n) {
      const double x0 = cx.left(n);
      const double x1 = cx.right(n);
      if (!(x1 > x0)) continue;
      const cplx j = semi.J(x0, x1, ys[kk]);
      col += static_cast<double>(bin_sign(n)) * j;
      magnitude += std::abs(j);
    }
    total += static_cast<double>(coef[kk]) * col;
  }
  out.value = semi.outer_scale() * total;
  out.error = 0.5 * abs_tol + scale_mag * (semi.error() + 1e-15 * magnitude);
  out.evaluations = semi.evaluations();
  return out;
}

}  // namespace

std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::automatic:
      return "automatic";
    case Engine::fourier:
      return "fourier";
    case Engine::rectangles:
      return "rectangles";
    case Engine::semi_analytic:
      return "semi_analytic";
    case Engine::closed_form:
      return "closed_form";
  }
  return "unknown";
}

double gaussian_tail_radius(double c, double scale, double tol) {
  if (scale <= tol) return 0.0;
  const double sc = std::sqrt(c);
  double lo = 0.0;
  double hi = 1.0;
  while (scale * std::erfc(sc * hi) > tol) hi *= 2.0;
  for (int i = 0; i < 80 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (scale * std::erfc(sc * mid) > tol ? lo : hi) = mid;
  }
  return hi;
}

cplx rectangle_integral(const simd::QuadForm& q, double x0, double x1, double y0, double y1,
                        double rel_tol, double abs_tol, int max_depth, double* error_out) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidParameter("rectangle must satisfy x0 < x1, y0 < y1");
  const auto& lo_rule = quad::gauss_legendre(8);
  const auto& hi_rule = quad::gauss_legendre(12);

  const int nx = initial_panels(x0, x1, y0, y1, q.ct, q.cx);
  const int ny = initial_panels(y0, y1, x0, x1, q.cb, q.cx);
  std::vector<Panel> stack;
  stack.reserve(static_cast<std::size_t>(nx * ny) + 64);
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double px0 = x0 + i * hx;
      const double px1 = i + 1 == nx ? x1 : x0 + (i + 1) * hx;
      const double py0 = y0 + j * hy;
      const double py1 = j + 1 == ny ? y1 : y0 + (j + 1) * hy;
      stack.push_back({px0, px1, py0, py1, 0});
    }
  }

  // A coarse pass fixes the relative target; panel tolerances scale with area.
  cplx coarse = 0.0;
  double coarse_mag = 0.0;
  for (const auto& p : stack) {
    const cplx v = tensor_rule(q, lo_rule, p);
    coarse += v;
    coarse_mag += std::abs(v);
  }
  const double area = (x1 - x0) * (y1 - y0);
  const double target = std::max({abs_tol, rel_tol * std::abs(coarse), 1e-15 * coarse_mag});

  cplx total = 0.0;
  double err = 0.0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const cplx lo = tensor_rule(q, lo_rule, p);
    const cplx hi = tensor_rule(q, hi_rule, p);
    const double diff = std::abs(hi - lo);
    const double share = target * (p.x1 - p.x0) * (p.y1 - p.y0) / area;
    if (diff <= share) {
      total += hi;
      err += diff;
      continue;
    }
    if (p.depth >= max_depth) {
      throw ConvergenceFailure("rectangle quadrature exceeded subdivision depth " +
                               std::to_string(max_depth));
    }
    const double mx = 0.5 * (p.x0 + p.x1);
    const double my = 0.5 * (p.y0 + p.y1);
    const int d = p.depth + 1;
    stack.push_back({p.x0, mx, p.y0, my, d});
    stack.push_back({mx, p.x1, p.y0, my, d});
    stack.push_back({p.x0, mx, my, p.y1, d});
    stack.push_back({mx, p.x1, my, p.y1, d});
  }
  if (error_out != nullptr) *error_out = err;
  return total;
}

CostModel estimate_costs(const GaussKernel& k, double ell, double abs_tol, int max_terms) {
  CostModel cost{kInf, kInf, kInf};
  const simd::QuadForm q = form_of(k);
  const Envelope env(q);
  if (!env.definite() || !(ell > 0.0)) return cost;

  const FourierPlan plan = plan_fourier(k, ell, abs_tol, max_terms);
  if (plan.feasible) {
    const double half = (plan.K + 1) / 2.0;
    cost.fourier = half * 2.0 * half;
  }

  const Box box = truncation_box(env, 0.5 * abs_tol);
  const Cells cx = cells_for(box.X, ell);
  const Cells cy = cells_for(box.Y, ell);
  if (cx.count() <= max_terms && cy.count() <= max_terms) {
    const double cells = static_cast<double>(std::max<long long>(cx.count(), 1)) *
                          static_cast<double>(std::max<long long>(cy.count(), 1));
    // A typical cell sits at about half the box radius.
    const double hx = std::min(ell, 2.0 * box.X);
    const double hy = std::min(ell, 2.0 * box.Y);
    const double xm = 0.5 * box.X;
    const double ym = 0.5 * box.Y;
    cost.rectangles = cells * rect_cell_cost(q, xm - 0.5 * hx, xm + 0.5 * hx, ym - 0.5 * hy,
                                             ym + 0.5 * hy);
    // Each semi-analytic breakpoint costs a Faddeeva evaluation and a GK
    // panel, about 50 vectorised exponentials apiece (measured).
    cost.semi_analytic = 7500.0 * static_cast<double>(cx.count() + 1) *
                         static_cast<double>(cy.count() + 1);
  }
  return cost;
}

Engine choose_engine(const GaussKernel& k, double ell, double abs_tol, int max_terms) {
  const CostModel c = estimate_costs(k, ell, abs_tol, max_terms);
  if (c.fourier <= c.rectangles && c.fourier <= c.semi_analytic && std::isfinite(c.fourier)) {
    return Engine::fourier;
  }
  if (c.rectangles <= c.semi_analytic && std::isfinite(c.rectangles)) return Engine::rectangles;
  return Engine::semi_analytic;
}

std::optional<cplx> signed_quadrant_integral(const GaussKernel& k) {
  const cplx root = std::sqrt(k.c_cross * k.c_cross - 4.0 * k.c_tilde * k.c_bar);
  const cplx w = k.c_cross / root;
  const double cut_tol = 1e-12 * std::max(1.0, std::abs(w));
  if (std::abs(w.imag()) <= cut_tol && std::abs(w.real()) >= 1.0 - cut_tol) return std::nullopt;
  return -4.0 * std::atanh(w) / root;
}

namespace {

// Only cells -1 and 0 on each axis matter once the truncation box fits inside
// [-ell, ell]^2; their alternating sum is then the full signed-quadrant integral.
std::optional<SeriesSum> run_closed_form(const GaussKernel& k, double ell, double abs_tol) {
  const Box box = truncation_box(Envelope(form_of(k)), abs_tol);
  if (box.X > ell || box.Y > ell) return std::nullopt;
  const std::optional<cplx> v = signed_quadrant_integral(k);
  if (!v) return std::nullopt;
  return SeriesSum{*v, abs_tol + 1e-14 * std::abs(*v), 1, Engine::closed_form};
}

}  // namespace

SeriesSum alternating_sum(const GaussKernel& k, double ell, double abs_tol, double rel_tol,
                          int max_terms, Engine engine) {
  check_kernel(k, ell);
  if (engine == Engine::closed_form) {
    if (auto s = run_closed_form(k, ell, abs_tol)) return *s;
    throw UnsupportedCombination("closed form needs ell beyond the Gaussian support");
  }
  if (engine == Engine::automatic) {
    if (auto s = run_closed_form(k, ell, abs_tol)) return *s;
    engine = choose_engine(k, ell, abs_tol, max_terms);
  }
  switch (engine) {
    case Engine::fourier:
      return run_fourier(k, ell, abs_tol, max_terms);
    case Engine::rectangles:
      return run_rectangles(k, ell, abs_tol, rel_tol, max_terms);
    case Engine::semi_analytic:
    case Engine::automatic:
    case Engine::closed_form:
      break;
  }
  return run_semi(k, ell, abs_tol, max_terms);
}

}  // namespace lgsq::engine
