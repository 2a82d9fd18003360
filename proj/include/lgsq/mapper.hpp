#pragma once
// Maximisation of the strings over ell, 2D parameter scans, level-set contours,
// alpha rotations and decoherence sweeps.

#include <array>
#include <functional>
#include <string_view>
#include <vector>

#include "lgsq/lgi.hpp"

namespace lgsq {

enum class StringChoice { k3, k3_prime };

std::string_view string_name(StringChoice s);

/// Picks K3 or K3' out of a string pair.
double pick(const LgiStrings& s, StringChoice choice);

struct EllRange {
  double lo = 0.05;
  double hi = 50.0;
  int coarse_points = 64;     // log-spaced
  double refine_tol = 1e-3;   // golden-section bracket width in log ell
  bool include_plateau = true;

  void validate() const;
};

struct ProfilePoint {
  double ell;  // infinity for the plateau candidate
  double k;    // NaN when the evaluation failed
  double error;
};

struct EllMaximum {
  double ell_star = 0.0;
  double k_max = 0.0;
  double error = 0.0;  // propagated error at ell_star
  double plateau_k = 0.0;  // NaN if the plateau evaluation failed or was not requested
  double k_min = 0.0;      // lowest sampled value, for lower-bound checks
  double k_min_error = 0.0;
  int failures = 0;
  std::vector<ProfilePoint> profile;  // sorted by ell, plateau last

  /// k_max clears 1 by more than `factor` times its own error.
  bool violates(double factor = 3.0) const;
};

/// Coarse log scan of K(ell) plus the plateau, then golden-section refinement
/// around every local maximum of the scan. p.spec is ignored. Throws
/// ConvergenceFailure only if every sample failed.
EllMaximum maximize_over_ell(const Protocol3& p, StringChoice choice, const EllRange& range = {},
                             const ToleranceConfig& tol = {});

enum class Param { r_a, phi_a, r_b, phi_b, r_c, phi_c };

std::string_view param_name(Param p);
/// Throws InvalidParameter for unknown names.
Param param_from_name(std::string_view name);

struct AxisSpec {
  Param param = Param::r_b;
  double lo = 0.0;
  double hi = 2.0;
  int n = 101;

  double value(int i) const;
};

/// Base protocol with two of its six squeezing parameters overridden per node.
struct Slice {
  Protocol3 base;
  AxisSpec x;
  AxisSpec y;

  void validate() const;
  Protocol3 at(int i, int j) const;
};

struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

/// Row-major nx by ny grid, value(i, j) at (x_i, y_j); NaN marks missing data.
struct Grid {
  int nx = 0;
  int ny = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

struct ViolationMap {
  Slice slice;
  StringChoice choice = StringChoice::k3;
  EllRange range;
  Grid k_max;
  Grid ell_star;
  Grid error;
  Grid plateau_k;
  Grid k_min;  // lowest sampled string value at each node
  Grid k_min_error;
  std::vector<Polyline> contours;          // k_max = 1
  std::vector<Polyline> plateau_contours;  // plateau_k = 1
  int failed_nodes = 0;
};

/// Progress callback receives the number of finished nodes.
using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// maximize_over_ell at every node. Node failures become NaN entries. Values do
/// not depend on the thread count.
ViolationMap scan_2d(const Slice& slice, StringChoice choice, const EllRange& range = {},
                     const ToleranceConfig& tol = {}, int threads = 0,
                     const Progress& progress = {});

/// Marching squares with linear interpolation along cell edges. Saddle cells
/// are resolved by the mean of their four corners; cells touching NaN are skipped.
std::vector<Polyline> contours(const Grid& g, double level);

/// Every squeezing angle moved by alpha (and reduced).
Protocol3 alpha_shift(const Protocol3& p, double alpha);

struct DecoherencePoint {
  double xi;
  double k3;
  double error;
};

/// Plateau K3 with the protocol's channel sign at each xi. p.spec and
/// p.channel.xi are ignored.
std::vector<DecoherencePoint> decoherence_scan(const Protocol3& p, const std::vector<double>& xi_grid,
                                               const ToleranceConfig& tol = {});

}  // namespace lgsq
