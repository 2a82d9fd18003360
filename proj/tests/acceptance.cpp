// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail 1,5,9] [--threads N] [--only 3,4]
//
// Exit status is 0 when every criterion either passes or is listed in
// --expect-fail; an expected failure that passes is reported but not an error.

#include <algorithm>
#include <atomic>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lgsq/correlator.hpp"
#include "lgsq/errors.hpp"
#include "lgsq/lgi.hpp"
#include "lgsq/mapper.hpp"
#include "lgsq/oracle.hpp"
#include "lgsq/thread_pool.hpp"

using namespace lgsq;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

// Lowest string value seen anywhere, with the margin it was seen under.
struct LowerBound {
  std::mutex mu;
  double k = 10.0;
  double margin = 0.0;
  void see(double v, double m) {
    std::lock_guard<std::mutex> lock(mu);
    if (v < k) {
      k = v;
      margin = m;
    }
  }
};

struct Context {
  int threads = 1;
  LowerBound lower;
  std::vector<ViolationMap> maps;  // K3 then K3'
};

const Protocol3 kSliceBase{{1.0, 0.4}, {1.0, 0.4}, {1.0, 0.4}, {1.0}, {}};

// 1. Equal-time identity.
Outcome equal_time(Context&) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> r(0.1, 2.0), phi(-1.4, 1.4);
  double exact_dev = 0.0;
  double series_dev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SqueezeParams a(r(rng), phi(rng));
    exact_dev = std::max(exact_dev, std::abs(correlator(a, a, {1.0}).value - 1.0));
    const SqueezeParams b(a.r(), a.phi() + 1e-6);
    series_dev = std::max(series_dev, std::abs(correlator_general(a, b, {1.0}, {}).value - 1.0));
  }
  return {exact_dev == 0.0 && series_dev < 1e-4,
          fmt("analytic |C-1| = %.1e; general series at dphi = 1e-6: max |C-1| = %.3e (limit 1e-4)",
              exact_dev, series_dev)};
}

// 2. Qubit reference.
Outcome qubit(Context&) {
  const int n = 200000;
  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (qubit_k3(2 * kPi * i / n) > qubit_k3(2 * kPi * best / n)) best = i;
  }
  double a = 2 * kPi * (best - 1) / n;
  double b = 2 * kPi * (best + 1) / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  while (b - a > 1e-12) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (qubit_k3(c) >= qubit_k3(d)) b = d; else a = c;
  }
  const double x = 0.5 * (a + b);
  const double k = qubit_k3(x);
  return {std::abs(k - 1.5) < 1e-10 && std::abs(x - kPi / 3) < 1e-6,
          fmt("max %.15f at w tau = %.10f (pi/3 = %.10f)", k, x, kPi / 3)};
}

// 3. Dual-path equivalence.
Outcome dual_path(Context& ctx) {
  const auto pairs = oracle::random_fixture_cases(kSeed + 3, 200);
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_real_distribution<double> ell_dist(0.2, 5.0);
  std::vector<double> ells;
  for (std::size_t i = 0; i < pairs.size(); ++i) ells.push_back(ell_dist(rng));
  std::vector<double> dev(pairs.size(), kNaN);
  parallel_for(pairs.size(), ctx.threads, [&](std::size_t i) {
    try {
      const double v = correlator_general(pairs[i].a, pairs[i].b, {ells[i]}, {}).value;
      dev[i] = std::abs(v - oracle::oracle_correlator(pairs[i].a, pairs[i].b, ells[i]));
    } catch (const Error&) {
    }
  });
  double worst = 0.0;
  int failed = 0;
  for (double d : dev) {
    if (std::isnan(d)) ++failed; else worst = std::max(worst, d);
  }
  return {failed == 0 && worst < 1e-6,
          fmt("200 configs, max |general - oracle| = %.3e (limit 1e-6), %d failed", worst, failed)};
}

// 4. det M closed form vs 6x6 determinant.
Outcome det_m(Context&) {
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_real_distribution<double> r(0.0, 2.0), phi(-kPi / 2, kPi / 2);
  double worst = 0.0;
  double smallest = 1e300;
  for (int i = 0; i < 10000; ++i) {
    const SqueezeParams a(r(rng), phi(rng)), b(r(rng), phi(rng));
    const cplx closed = oracle::det_M_closed(a, b);
    const cplx numeric = oracle::det_M_numeric(a, b);
    worst = std::max(worst, std::abs(closed - numeric) / std::abs(closed));
    smallest = std::min(smallest, std::abs(closed));
  }
  return {worst < 1e-10, fmt("10^4 configs, max relative error %.3e (limit 1e-10), smallest |det M| %.2e",
                             worst, smallest)};
}

// 5. Limit consistency.
Outcome limits(Context&) {
  std::mt19937_64 rng(kSeed + 6);
  std::uniform_real_distribution<double> r(0.0, 2.0), ell_dist(0.2, 5.0);
  double zero_dev = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double ra = r(rng), rb = r(rng), ell = ell_dist(rng);
    const double series = correlator_zero_angle(ra, rb, {ell}).value;
    const double general = correlator_general({ra, 1e-5}, {rb, 1e-5}, {ell}, {}).value;
    zero_dev = std::max(zero_dev, std::abs(series - general));
  }
  const auto pairs = oracle::random_fixture_cases(kSeed + 7, 20);
  double plateau_dev = 0.0;
  for (const auto& fc : pairs) {
    const double p = correlator_plateau(fc.a, fc.b, {}).value;
    const double g = correlator_general(fc.a, fc.b, {30.0}, {}).value;
    plateau_dev = std::max(plateau_dev, std::abs(p - g));
  }
  return {zero_dev < 1e-3 && plateau_dev < 1e-4,
          fmt("zero-angle vs general at phi = 1e-5: max |d| = %.3e (limit 1e-3); "
              "plateau vs ell = 30: max |d| = %.3e (limit 1e-4)",
              zero_dev, plateau_dev)};
}

// 6. No violation with vanishing angles.
Outcome zero_angle_grid(Context& ctx) {
  std::vector<double> rs;
  for (int i = 0; i <= 12; ++i) rs.push_back(0.25 * i);
  std::vector<double> ells;
  for (int k = 0; k <= 8; ++k) ells.push_back(0.1 * std::ldexp(1.0, k));
  const std::size_t n = rs.size() * rs.size() * rs.size();
  std::vector<double> worst(n, -10.0);
  std::atomic<int> failed{0};
  parallel_for(n, ctx.threads, [&](std::size_t idx) {
    const double ra = rs[idx % 13], rb = rs[(idx / 13) % 13], rc = rs[idx / 169];
    for (double ell : ells) {
      try {
        const LgiStrings s = k3_protocol({{ra, 0.0}, {rb, 0.0}, {rc, 0.0}, {ell}, {}});
        worst[idx] = std::max({worst[idx], s.k3, s.k3_prime});
        ctx.lower.see(std::min(s.k3, s.k3_prime), s.margin);
      } catch (const Error&) {
        ++failed;
      }
    }
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  return {failed == 0 && w <= 1.0 + 1e-6,
          fmt("%zu protocols x 9 ell: max(K3, K3') = %.12f (limit 1 + 1e-6), %d failed", n, w, failed.load())};
}

// 7. Violation on the slice r_a = 1, all angles 0.4.
Outcome violation_map(Context& ctx) {
  const Slice slice{kSliceBase, {Param::r_b, 0.0, 2.0, 101}, {Param::r_c, 0.0, 2.0, 101}};
  ctx.maps.clear();
  for (StringChoice s : {StringChoice::k3, StringChoice::k3_prime}) {
    ctx.maps.push_back(scan_2d(slice, s, {}, {}, ctx.threads));
  }
  std::string detail;
  int k3_hits = 0;
  for (const ViolationMap& m : ctx.maps) {
    int hits = 0;
    double best = -10.0;
    for (std::size_t i = 0; i < m.k_max.values.size(); ++i) {
      const double k = m.k_max.values[i];
      if (std::isnan(k)) continue;
      best = std::max(best, k);
      if (k > 1.0 + 3.0 * m.error.values[i]) ++hits;
      ctx.lower.see(m.k_min.values[i], 3.0 * m.k_min_error.values[i]);
    }
    if (m.choice == StringChoice::k3) k3_hits = hits;
    detail += fmt("%s: %d/%zu nodes violate beyond 3x error, max %.6f, %zu contours, %d failed; ",
                  std::string(string_name(m.choice)).c_str(), hits, m.k_max.values.size(), best,
                  m.contours.size(), m.failed_nodes);
  }
  return {k3_hits > 0, detail};
}

// 8. Violation at finite ell with no violation on the plateau.
Outcome finite_ell_only(Context& ctx) {
  if (ctx.maps.empty()) return {false, "needs the criterion 7 maps"};
  int count = 0;
  std::string example;
  for (const ViolationMap& m : ctx.maps) {
    for (int j = 0; j < m.k_max.ny; ++j) {
      for (int i = 0; i < m.k_max.nx; ++i) {
        if (m.k_max(i, j) > 1.0 + 3.0 * m.error(i, j) && m.plateau_k(i, j) <= 1.0) {
          if (count++ == 0) {
            example = fmt("e.g. %s at r_b = %.2f, r_c = %.2f: k_max %.6f at ell %.4f, plateau %.6f",
                          std::string(string_name(m.choice)).c_str(), m.k_max.xs[i], m.k_max.ys[j],
                          m.k_max(i, j), m.ell_star(i, j), m.plateau_k(i, j));
          }
        }
      }
    }
  }
  return {count > 0, fmt("%d nodes; %s", count, example.c_str())};
}

// 9. Decoherence removes the violation.
Outcome decoherence(Context& ctx) {
  if (ctx.maps.empty()) return {false, "needs the criterion 7 maps"};
  const ViolationMap& m = ctx.maps.front();
  std::vector<Protocol3> violating;
  for (int j = 0; j < m.k_max.ny; ++j)
    for (int i = 0; i < m.k_max.nx; ++i)
      if (m.k_max(i, j) > 1.0 + 3.0 * m.error(i, j)) violating.push_back(m.slice.at(i, j));
  if (violating.empty()) return {false, "no violating protocol to test"};
  std::vector<Protocol3> picked;
  const std::size_t want = std::min<std::size_t>(10, violating.size());
  for (std::size_t s = 0; s < want; ++s) picked.push_back(violating[s * violating.size() / want]);

  std::vector<double> xi;
  for (int i = 0; i <= 40; ++i) xi.push_back(std::pow(10.0, 2.0 * i / 40));
  double max_k = -10.0;
  double max_tail = 0.0;
  for (Protocol3 p : picked) {
    p.spec = MeasurementSpec::infinite();
    const auto pts = decoherence_scan(p, xi);
    for (const auto& pt : pts) max_k = std::max(max_k, pt.k3);
    max_tail = std::max(max_tail, std::abs(pts.back().k3));
  }
  return {max_k <= 1.0 && max_tail <= 0.05,
          fmt("%zu protocols: max K3 over xi in [1, 100] = %.6f (limit 1); max |K3(100)| = %.4f (limit 0.05)",
              picked.size(), max_k, max_tail)};
}

// 10. Bounds and symmetry.
Outcome bounds(Context& ctx) {
  std::mt19937_64 rng(kSeed + 8);
  std::uniform_real_distribution<double> r(0.0, 2.0), phi(-kPi / 2, kPi / 2), ell_dist(0.2, 5.0);
  struct Case {
    SqueezeParams a, b;
    double ell;
  };
  std::vector<Case> cases;
  for (int i = 0; i < 500; ++i) cases.push_back({{r(rng), phi(rng)}, {r(rng), phi(rng)}, ell_dist(rng)});
  std::vector<double> excess(cases.size(), kNaN), asym(cases.size(), kNaN);
  parallel_for(cases.size(), ctx.threads, [&](std::size_t i) {
    try {
      const CorrelatorResult ab = correlator(cases[i].a, cases[i].b, {cases[i].ell});
      const CorrelatorResult ba = correlator(cases[i].b, cases[i].a, {cases[i].ell});
      excess[i] = std::abs(ab.value) - 1.0 - ab.err_estimate;
      asym[i] = std::abs(ab.value - ba.value) - ab.err_estimate - ba.err_estimate;
    } catch (const Error&) {
    }
  });
  int failed = 0;
  double worst_excess = -10.0, worst_asym = -10.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (std::isnan(excess[i])) {
      ++failed;
      continue;
    }
    worst_excess = std::max(worst_excess, excess[i]);
    worst_asym = std::max(worst_asym, asym[i]);
  }
  // Random triples feed the lower-bound report alongside the grid and map scans.
  const auto r_dist = r;
  const auto phi_dist = phi;
  const auto ell_range = ell_dist;
  parallel_for(200, ctx.threads, [&](std::size_t i) {
    std::mt19937_64 local(kSeed + 9 + i);
    auto r = r_dist;
    auto phi = phi_dist;
    auto ell_dist = ell_range;
    try {
      const LgiStrings s = k3_protocol({{r(local), phi(local)}, {r(local), phi(local)}, {r(local), phi(local)},
                                        {ell_dist(local)}, {}});
      ctx.lower.see(std::min(s.k3, s.k3_prime), s.margin);
    } catch (const Error&) {
    }
  });
  const bool breached = ctx.lower.k < -3.0 - ctx.lower.margin;
  std::printf("  report: lowest string value over all scans %.6f (bound -3 - margin: %s)\n", ctx.lower.k,
              breached ? "BREACHED" : "held");
  return {failed == 0 && worst_excess <= 0.0 && worst_asym <= 0.0,
          fmt("500 configs: max(|C| - 1 - err) = %.3e, max(|C_ab - C_ba| - err_ab - err_ba) = %.3e, %d failed",
              worst_excess, worst_asym, failed)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail;
  std::set<int> only;
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) {
      expect_fail = parse_list(argv[++i]);
    } else if (a == "--only" && i + 1 < argc) {
      only = parse_list(argv[++i]);
    } else if (a == "--threads" && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail 1,5,9] [--only 1,2] [--threads N]\n");
      return 2;
    }
  }
  Context ctx;
  ctx.threads = resolve_threads(threads);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome(Context&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "equal-time identity", 1.0, equal_time},
      {2, "qubit reference", 1.0, qubit},
      {3, "dual-path equivalence", 600.0, dual_path},
      {4, "det M closed vs numeric", 30.0, det_m},
      {5, "limit consistency", 300.0, limits},
      {6, "zero-angle no-violation", 1800.0, zero_angle_grid},
      {7, "violation existence", 7200.0, violation_map},
      {8, "finite-ell-only violation", 1.0, finite_ell_only},
      {9, "decoherence kill", 600.0, decoherence},
      {10, "bounds and symmetry", 900.0, bounds},
  };
  // 8 and 9 read the maps built by 7.
  if (!only.empty() && (only.count(8) || only.count(9))) only.insert(7);

  int unexpected = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("aborted: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    const bool expected = expect_fail.count(c.id) > 0;
    std::printf("criterion %2d %s  %-26s %8.2fs  %s%s%s\n", c.id, pass ? "PASS" : "FAIL", c.name, dt,
                o.detail.c_str(), in_time ? "" : fmt(" [over the %.0fs budget]", c.budget_s).c_str(),
                !pass && expected ? " [expected]" : "");
    std::fflush(stdout);
    if (!pass && !expected) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
