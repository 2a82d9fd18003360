#include "lgsq/mapper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "lgsq/errors.hpp"
#include "lgsq/thread_pool.hpp"

namespace lgsq {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

ProfilePoint sample(const Protocol3& base, double ell, StringChoice choice, const ToleranceConfig& tol) {
  Protocol3 p = base;
  p.spec.ell = ell;
  try {
    const LgiStrings s = k3_protocol(p, tol);
    return {ell, pick(s, choice), s.error};
  } catch (const Error&) {
    return {ell, kNaN, 0.0};
  }
}

double or_lowest(double k) { return std::isnan(k) ? -kInf : k; }

// Golden-section maximisation of K over log(ell) in [t0, t1]; every sample is
// appended to `out`.
void golden(const Protocol3& p, StringChoice choice, const ToleranceConfig& tol, double t0, double t1,
            double width, std::vector<ProfilePoint>& out) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double t) {
    out.push_back(sample(p, std::exp(t), choice, tol));
    return or_lowest(out.back().k);
  };
  double a = t0;
  double b = t1;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
}

SqueezeParams with(const SqueezeParams& s, bool amplitude, double v) {
  return amplitude ? SqueezeParams(v, s.phi()) : SqueezeParams(s.r(), v);
}

void set_param(Protocol3& p, Param which, double v) {
  switch (which) {
    case Param::r_a: p.a = with(p.a, true, v); break;
    case Param::phi_a: p.a = with(p.a, false, v); break;
    case Param::r_b: p.b = with(p.b, true, v); break;
    case Param::phi_b: p.b = with(p.b, false, v); break;
    case Param::r_c: p.c = with(p.c, true, v); break;
    case Param::phi_c: p.c = with(p.c, false, v); break;
  }
}

bool is_amplitude(Param p) { return p == Param::r_a || p == Param::r_b || p == Param::r_c; }

Grid empty_grid(const Slice& s) {
  Grid g;
  g.nx = s.x.n;
  g.ny = s.y.n;
  for (int i = 0; i < g.nx; ++i) g.xs.push_back(s.x.value(i));
  for (int j = 0; j < g.ny; ++j) g.ys.push_back(s.y.value(j));
  g.values.assign(static_cast<std::size_t>(g.nx) * g.ny, kNaN);
  return g;
}

}  // namespace

std::string_view string_name(StringChoice s) { return s == StringChoice::k3 ? "K3" : "K3prime"; }

double pick(const LgiStrings& s, StringChoice choice) {
  return choice == StringChoice::k3 ? s.k3 : s.k3_prime;
}

void EllRange::validate() const {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw InvalidParameter("ell range needs 0 < lo < hi < infinity");
  }
  if (coarse_points < 2) throw InvalidParameter("ell scan needs at least 2 points");
  if (!(refine_tol > 0.0)) throw InvalidParameter("refinement tolerance must be positive");
}

bool EllMaximum::violates(double factor) const { return k_max > 1.0 + factor * error; }

EllMaximum maximize_over_ell(const Protocol3& p, StringChoice choice, const EllRange& range,
                             const ToleranceConfig& tol) {
  range.validate();
  p.channel.validate();
  tol.validate();
  const int n = range.coarse_points;
  const double t_lo = std::log(range.lo);
  const double t_hi = std::log(range.hi);
  auto t_at = [&](int i) { return t_lo + (t_hi - t_lo) * i / (n - 1); };

  std::vector<ProfilePoint> coarse;
  coarse.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Pin the end points so rounding in exp(log(.)) does not leave the range.
    const double ell = i == 0 ? range.lo : (i == n - 1 ? range.hi : std::exp(t_at(i)));
    coarse.push_back(sample(p, ell, choice, tol));
  }

  std::vector<ProfilePoint> extra;
  for (int i = 0; i < n; ++i) {
    const double k = or_lowest(coarse[i].k);
    if (k == -kInf) continue;
    const double left = i > 0 ? or_lowest(coarse[i - 1].k) : -kInf;
    const double right = i + 1 < n ? or_lowest(coarse[i + 1].k) : -kInf;
    // Strict on the left so a flat run is refined once.
    if (!(k > left && k >= right)) continue;
    if (i > 0 && i + 1 < n && k == left && k == right) continue;
    golden(p, choice, tol, t_at(std::max(i - 1, 0)), t_at(std::min(i + 1, n - 1)), range.refine_tol,
           extra);
  }

  EllMaximum out;
  out.profile = std::move(coarse);
  out.profile.insert(out.profile.end(), extra.begin(), extra.end());
  std::stable_sort(out.profile.begin(), out.profile.end(),
                   [](const ProfilePoint& l, const ProfilePoint& r) { return l.ell < r.ell; });
  out.plateau_k = kNaN;
  if (range.include_plateau) {
    Protocol3 q = p;
    q.spec = MeasurementSpec::infinite();
    const ProfilePoint pl = sample(q, kInf, choice, tol);
    out.plateau_k = pl.k;
    out.profile.push_back(pl);
  }

  bool any = false;
  for (const ProfilePoint& pt : out.profile) {
    if (std::isnan(pt.k)) {
      ++out.failures;
      continue;
    }
    if (!any || pt.k < out.k_min) {
      out.k_min = pt.k;
      out.k_min_error = pt.error;
    }
    if (!any || pt.k > out.k_max) {
      any = true;
      out.k_max = pt.k;
      out.ell_star = pt.ell;
      out.error = pt.error;
    }
  }
  if (!any) throw ConvergenceFailure("every ell sample failed");
  return out;
}

std::string_view param_name(Param p) {
  switch (p) {
    case Param::r_a: return "r_a";
    case Param::phi_a: return "phi_a";
    case Param::r_b: return "r_b";
    case Param::phi_b: return "phi_b";
    case Param::r_c: return "r_c";
    case Param::phi_c: return "phi_c";
  }
  return "unknown";
}

Param param_from_name(std::string_view name) {
  for (Param p : {Param::r_a, Param::phi_a, Param::r_b, Param::phi_b, Param::r_c, Param::phi_c}) {
    if (param_name(p) == name) return p;
  }
  throw InvalidParameter("unknown slice parameter '" + std::string(name) + "'");
}

double AxisSpec::value(int i) const {
  if (n == 1) return lo;
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void Slice::validate() const {
  base.channel.validate();
  for (const AxisSpec* ax : {&x, &y}) {
    if (ax->n < 2) throw InvalidParameter("each slice axis needs at least 2 nodes");
    if (!std::isfinite(ax->lo) || !std::isfinite(ax->hi) || !(ax->hi > ax->lo)) {
      throw InvalidParameter("slice axis range must be finite with lo < hi");
    }
    if (is_amplitude(ax->param) && ax->lo < 0.0) {
      throw InvalidParameter("squeezing amplitude axis must start at r >= 0");
    }
  }
  if (x.param == y.param) throw InvalidParameter("slice axes must differ");
}

Protocol3 Slice::at(int i, int j) const {
  Protocol3 p = base;
  set_param(p, x.param, x.value(i));
  set_param(p, y.param, y.value(j));
  return p;
}

ViolationMap scan_2d(const Slice& slice, StringChoice choice, const EllRange& range,
                     const ToleranceConfig& tol, int threads, const Progress& progress) {
  slice.validate();
  range.validate();
  tol.validate();
  const Grid blank = empty_grid(slice);
  ViolationMap m{slice, choice, range, blank, blank, blank, blank, blank, blank, {}, {}, 0};

  const std::size_t total = m.k_max.values.size();
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  parallel_for(total, resolve_threads(threads), [&](std::size_t idx) {
    const int i = static_cast<int>(idx % static_cast<std::size_t>(slice.x.n));
    const int j = static_cast<int>(idx / static_cast<std::size_t>(slice.x.n));
    try {
      const EllMaximum best = maximize_over_ell(slice.at(i, j), choice, range, tol);
      m.k_max.values[idx] = best.k_max;
      m.ell_star.values[idx] = best.ell_star;
      m.error.values[idx] = best.error;
      m.plateau_k.values[idx] = best.plateau_k;
      m.k_min.values[idx] = best.k_min;
      m.k_min_error.values[idx] = best.k_min_error;
    } catch (const Error&) {
      // Missing data; counted below.
    }
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mu);
      progress(d, total);
    }
  });
  for (double v : m.k_max.values) m.failed_nodes += std::isnan(v) ? 1 : 0;
  m.contours = contours(m.k_max, 1.0);
  m.plateau_contours = contours(m.plateau_k, 1.0);
  return m;
}

std::vector<Polyline> contours(const Grid& g, double level) {
  // Crossing points live on grid edges. Edge ids: 2*(j*nx+i) is the edge from
  // (i,j) to (i+1,j), 2*(j*nx+i)+1 the edge from (i,j) to (i,j+1).
  const int nx = g.nx;
  auto hid = [nx](int i, int j) { return 2L * (static_cast<long>(j) * nx + i); };
  auto vid = [nx](int i, int j) { return 2L * (static_cast<long>(j) * nx + i) + 1; };
  auto point = [&](long id) -> std::array<double, 2> {
    const long node = id / 2;
    const int i = static_cast<int>(node % nx);
    const int j = static_cast<int>(node / nx);
    const bool vertical = (id % 2) == 1;
    const int i1 = vertical ? i : i + 1;
    const int j1 = vertical ? j + 1 : j;
    const double v0 = g(i, j);
    const double v1 = g(i1, j1);
    const double t = (level - v0) / (v1 - v0);
    return {g.xs[i] + t * (g.xs[i1] - g.xs[i]), g.ys[j] + t * (g.ys[j1] - g.ys[j])};
  };

  std::vector<std::array<long, 2>> segs;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double v[4] = {g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)};
      if (std::isnan(v[0]) || std::isnan(v[1]) || std::isnan(v[2]) || std::isnan(v[3])) continue;
      int c = 0;
      for (int k = 0; k < 4; ++k) c |= (v[k] >= level ? 1 : 0) << k;
      if (c == 0 || c == 15) continue;
      // Cell edges: bottom, right, top, left.
      const long e[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      const bool centre_high = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
      auto add = [&](int p, int q) { segs.push_back({e[p], e[q]}); };
      switch (c) {
        case 1: case 14: add(3, 0); break;
        case 2: case 13: add(0, 1); break;
        case 3: case 12: add(3, 1); break;
        case 4: case 11: add(1, 2); break;
        case 6: case 9: add(0, 2); break;
        case 7: case 8: add(3, 2); break;
        case 5:
          if (centre_high) { add(0, 1); add(2, 3); } else { add(3, 0); add(1, 2); }
          break;
        case 10:
          if (centre_high) { add(3, 0); add(1, 2); } else { add(0, 1); add(2, 3); }
          break;
        default: break;
      }
    }
  }

  // Each edge carries at most two segments, so segments chain into paths.
  std::map<long, std::vector<std::size_t>> at_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at_edge[segs[s][0]].push_back(s);
    at_edge[segs[s][1]].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> out;
  auto trace = [&](std::size_t s0, long start) {
    Polyline pl;
    pl.points.push_back(point(start));
    long edge = start;
    std::size_t s = s0;
    for (;;) {
      used[s] = true;
      edge = segs[s][0] == edge ? segs[s][1] : segs[s][0];
      if (edge == start) {
        pl.closed = true;
        break;
      }
      pl.points.push_back(point(edge));
      std::size_t nxt = segs.size();
      for (std::size_t cand : at_edge[edge]) {
        if (!used[cand]) nxt = cand;
      }
      if (nxt == segs.size()) break;
      s = nxt;
    }
    out.push_back(std::move(pl));
  };
  // Open paths first, from their free ends; whatever remains is closed.
  for (const auto& [edge, list] : at_edge) {
    if (list.size() == 1 && !used[list[0]]) trace(list[0], edge);
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) trace(s, segs[s][0]);
  }
  return out;
}

Protocol3 alpha_shift(const Protocol3& p, double alpha) {
  if (!std::isfinite(alpha)) throw InvalidParameter("alpha must be finite");
  Protocol3 q = p;
  q.a = SqueezeParams(p.a.r(), p.a.phi() + alpha);
  q.b = SqueezeParams(p.b.r(), p.b.phi() + alpha);
  q.c = SqueezeParams(p.c.r(), p.c.phi() + alpha);
  return q;
}

std::vector<DecoherencePoint> decoherence_scan(const Protocol3& p, const std::vector<double>& xi_grid,
                                               const ToleranceConfig& tol) {
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    if (!(xi_grid[i] >= 0.0) || !std::isfinite(xi_grid[i]) || (i > 0 && xi_grid[i] < xi_grid[i - 1])) {
      throw InvalidParameter("xi grid must be finite, nonnegative and ascending");
    }
  }
  std::vector<DecoherencePoint> out;
  out.reserve(xi_grid.size());
  for (double xi : xi_grid) {
    Protocol3 q = p;
    q.spec = MeasurementSpec::infinite();
    q.channel.xi = xi;
    const LgiStrings s = k3_protocol(q, tol);
    out.push_back({xi, s.k3, s.error});
  }
  return out;
}

}  // namespace lgsq
