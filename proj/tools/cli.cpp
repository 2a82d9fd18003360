#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lgsq/correlator.hpp"
#include "lgsq/engines.hpp"
#include "lgsq/errors.hpp"
#include "lgsq/kernel.hpp"
#include "lgsq/lgi.hpp"
#include "lgsq/mapper.hpp"
#include "lgsq/oracle.hpp"
#include "lgsq/simd.hpp"
#include "lgsq/thread_pool.hpp"

#ifndef LGSQ_VERSION
#define LGSQ_VERSION "0.0.0"
#endif

namespace lgsq::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kCommands[] = {"corr", "k3", "scan-ell", "map", "decoherence", "validate"};

// Reads a JSON object into CLI11 config items. Nested objects name a
// subcommand; flat keys belong to the subcommand given on the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON configuration is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [k2, v2] : value.items()) items.push_back(item({key}, k2, v2));
      } else {
        std::vector<std::string> parents;
        if (!section_.empty()) parents.push_back(section_);
        items.push_back(item(parents, key, value));
      }
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config values must be strings, numbers, booleans or arrays of them");
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& key, const json& v) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = key;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    } else {
      it.inputs.push_back(scalar(v));
    }
    return it;
  }

  std::string section_;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

double parse_ell(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidParameter("--ell must be a number or 'inf', got '" + s + "'");
  }
  if (used != s.size()) throw InvalidParameter("--ell must be a number or 'inf', got '" + s + "'");
  return v;
}

struct Common {
  int threads = 0;
  double tail_tol = 1e-10;
  double rel_tol = 1e-8;
  double singular = 1e-8;
  int max_terms = 10000;
  double xi = 0.0;
  std::string xi_sign = "paper";
  std::string out;

  ToleranceConfig tolerances() const {
    ToleranceConfig t{tail_tol, rel_tol, singular, max_terms};
    t.validate();
    return t;
  }
  DecoherenceChannel channel() const {
    DecoherenceChannel ch{xi, xi_sign == "physical" ? CrossSign::physical_channel : CrossSign::paper_literal};
    ch.validate();
    return ch;
  }
  json tolerance_json() const {
    return {{"series_tail_tol", tail_tol},
            {"quadrature_rel_tol", rel_tol},
            {"singular_threshold", singular},
            {"max_terms", max_terms}};
  }
};

void add_tolerances(CLI::App* app, Common& c) {
  app->add_option("--tail-tol", c.tail_tol, "absolute truncation tolerance of the series")
      ->capture_default_str();
  app->add_option("--rel-tol", c.rel_tol, "relative quadrature tolerance")->capture_default_str();
  app->add_option("--singular-threshold", c.singular, "|det M| below which limit formulas apply")
      ->capture_default_str();
  app->add_option("--max-terms", c.max_terms, "cell budget per axis")->capture_default_str();
  app->add_option("--out", c.out, "output file (default stdout)");
}

void add_channel(CLI::App* app, Common& c) {
  app->add_option("--xi", c.xi, "decoherence strength")->capture_default_str();
  app->add_option("--xi-sign", c.xi_sign, "sign of the xi shift on the cross term")
      ->check(CLI::IsMember({"paper", "physical"}))
      ->capture_default_str();
}

struct Triple {
  double ra = 1.0, phia = 0.4;
  double rb = 1.0, phib = 0.4;
  double rc = 1.0, phic = 0.4;
};

void add_state(CLI::App* app, const char* r_flag, double& r, const char* phi_flag, double& phi,
               bool required) {
  auto* o1 = app->add_option(r_flag, r, "squeezing amplitude");
  auto* o2 = app->add_option(phi_flag, phi, "squeezing angle (radians)");
  if (required) {
    o1->required();
    o2->required();
  } else {
    o1->capture_default_str();
    o2->capture_default_str();
  }
}

void add_triple(CLI::App* app, Triple& t, bool required) {
  add_state(app, "--ra", t.ra, "--phia", t.phia, required);
  add_state(app, "--rb", t.rb, "--phib", t.phib, required);
  add_state(app, "--rc", t.rc, "--phic", t.phic, required);
}

json triple_json(const Triple& t) {
  return {{"ra", t.ra}, {"phia", t.phia}, {"rb", t.rb}, {"phib", t.phib}, {"rc", t.rc}, {"phic", t.phic}};
}

json provenance(const std::string& command, json params, const Common& c, json seed = nullptr) {
  params["xi"] = c.xi;
  params["xi_sign"] = c.xi_sign;
  return {{"tool", "lgi"},
          {"version", LGSQ_VERSION},
          {"command", command},
          {"params", std::move(params)},
          {"tolerances", c.tolerance_json()},
          {"seed", std::move(seed)},
          {"simd", std::string(simd::backend_name(simd::active_backend()))}};
}

// Destination for data: the --out file or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InvalidParameter("cannot open output file '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParameter("cannot open output file '" + path + "'");
  f << doc.dump(2) << "\n";
}

engine::Engine parse_engine(const std::string& s) {
  if (s == "auto") return engine::Engine::automatic;
  if (s == "fourier") return engine::Engine::fourier;
  if (s == "rectangles") return engine::Engine::rectangles;
  if (s == "semi") return engine::Engine::semi_analytic;
  return engine::Engine::closed_form;
}

StringChoice parse_string(const std::string& s) {
  return s == "K3prime" ? StringChoice::k3_prime : StringChoice::k3;
}

json polylines_json(const std::vector<Polyline>& lines) {
  json arr = json::array();
  for (const Polyline& pl : lines) {
    json pts = json::array();
    for (const auto& p : pl.points) pts.push_back({p[0], p[1]});
    arr.push_back(std::move(pts));
  }
  return arr;
}

json closed_flags(const std::vector<Polyline>& lines) {
  json arr = json::array();
  for (const Polyline& pl : lines) arr.push_back(pl.closed);
  return arr;
}

// ------------------------------------------------------------------ commands

struct CorrArgs {
  Common c;
  double ra = 0, phia = 0, rb = 0, phib = 0;
  std::string ell = "1";
  std::string engine = "auto";
};

int cmd_corr(const CorrArgs& a, std::ostream& out) {
  const ToleranceConfig tol = a.c.tolerances();
  const DecoherenceChannel ch = a.c.channel();
  const SqueezeParams pa(a.ra, a.phia);
  const SqueezeParams pb(a.rb, a.phib);
  const MeasurementSpec spec{parse_ell(a.ell)};
  spec.validate();
  const CorrelatorResult r = a.engine == "auto"
                                 ? correlator(pa, pb, spec, ch, tol)
                                 : correlator_general(pa, pb, spec, ch, tol, parse_engine(a.engine));
  json params = {{"ra", a.ra}, {"phia", a.phia}, {"rb", a.rb}, {"phib", a.phib},
                 {"ell", num(spec.ell)}, {"engine", a.engine}};
  json doc = {{"value", r.value},
              {"err_estimate", r.err_estimate},
              {"method", std::string(method_name(r.method))},
              {"provenance", provenance("corr", std::move(params), a.c)}};
  Sink sink(a.c.out, out);
  *sink << doc.dump(2) << "\n";
  return kOk;
}

struct K3Args {
  Common c;
  Triple t;
  std::string ell = "1";
  bool prime = false;
  double margin_factor = 3.0;
};

int cmd_k3(const K3Args& a, std::ostream& out) {
  const Protocol3 p{{a.t.ra, a.t.phia}, {a.t.rb, a.t.phib}, {a.t.rc, a.t.phic}, {parse_ell(a.ell)},
                    a.c.channel()};
  p.validate();
  if (!(a.margin_factor >= 0.0)) throw InvalidParameter("--margin-factor must be >= 0");
  const LgiStrings s = k3_protocol(p, a.c.tolerances(), a.margin_factor);
  json params = triple_json(a.t);
  params["ell"] = num(p.spec.ell);
  params["margin_factor"] = a.margin_factor;
  params["prime"] = a.prime;
  json doc = {{"k3", s.k3},
              {"k3_prime", s.k3_prime},
              {"classification",
               {{"k3", std::string(classification_name(s.k3_class))},
                {"k3_prime", std::string(classification_name(s.k3_prime_class))}}},
              {"margins", {{"error", s.error}, {"margin", s.margin}}}};
  if (a.prime) {
    doc["string"] = "K3prime";
    doc["value"] = s.k3_prime;
  } else {
    doc["string"] = "K3";
    doc["value"] = s.k3;
  }
  doc["provenance"] = provenance("k3", std::move(params), a.c);
  Sink sink(a.c.out, out);
  *sink << doc.dump(2) << "\n";
  return kOk;
}

struct EllArgs {
  double lo = 0.05;
  double hi = 50.0;
  int points = 64;
  double refine = 1e-3;
  std::string string = "K3";

  EllRange range() const {
    EllRange r{lo, hi, points, refine, true};
    r.validate();
    return r;
  }
  json to_json() const {
    return {{"ell_min", lo}, {"ell_max", hi}, {"ell_points", points}, {"ell_refine", refine},
            {"string", string}};
  }
};

void add_ell_range(CLI::App* app, EllArgs& e) {
  app->add_option("--ell-min", e.lo, "lower end of the ell scan")->capture_default_str();
  app->add_option("--ell-max", e.hi, "upper end of the ell scan")->capture_default_str();
  app->add_option("--ell-points", e.points, "log-spaced coarse samples")->capture_default_str();
  app->add_option("--ell-refine", e.refine, "golden-section width in log ell")->capture_default_str();
  app->add_option("--string", e.string, "which string to maximise")
      ->check(CLI::IsMember({"K3", "K3prime"}))
      ->capture_default_str();
}

struct ScanEllArgs {
  Common c;
  Triple t;
  EllArgs e;
};

int cmd_scan_ell(const ScanEllArgs& a, std::ostream& out, std::ostream& err) {
  const Protocol3 p{{a.t.ra, a.t.phia}, {a.t.rb, a.t.phib}, {a.t.rc, a.t.phic}, {1.0}, a.c.channel()};
  const EllMaximum m = maximize_over_ell(p, parse_string(a.e.string), a.e.range(), a.c.tolerances());
  json params = triple_json(a.t);
  params.update(a.e.to_json());
  Sink sink(a.c.out, out);
  *sink << "# " << provenance("scan-ell", std::move(params), a.c).dump() << "\n";
  *sink << "ell," << a.e.string << "\n";
  for (const ProfilePoint& pt : m.profile) *sink << fmt(pt.ell) << "," << fmt(pt.k) << "\n";
  if (m.failures > 0) err << "warning: " << m.failures << " ell samples failed\n";
  err << "k_max " << fmt(m.k_max) << " at ell " << fmt(m.ell_star) << ", plateau " << fmt(m.plateau_k)
      << "\n";
  const std::size_t n = m.profile.size();
  return static_cast<double>(m.failures) > 0.01 * static_cast<double>(n) ? kPartialGrid : kOk;
}

struct MapArgs {
  Common c;
  Triple t;
  EllArgs e;
  std::string x = "r_b";
  std::string y = "r_c";
  double x_min = 0.0, x_max = 2.0, y_min = 0.0, y_max = 2.0;
  int nx = 101, ny = 101;
  std::string contours_path;
  bool progress = false;
};

int cmd_map(const MapArgs& a, std::ostream& out, std::ostream& err) {
  const Protocol3 base{{a.t.ra, a.t.phia}, {a.t.rb, a.t.phib}, {a.t.rc, a.t.phic}, {1.0}, a.c.channel()};
  const Slice slice{base, {param_from_name(a.x), a.x_min, a.x_max, a.nx},
                    {param_from_name(a.y), a.y_min, a.y_max, a.ny}};
  slice.validate();
  const EllRange range = a.e.range();
  const ToleranceConfig tol = a.c.tolerances();
  const int threads = resolve_threads(a.c.threads);

  std::string contour_path = a.contours_path;
  if (contour_path.empty() && !a.c.out.empty()) {
    const std::string& o = a.c.out;
    const bool csv = o.size() > 4 && o.compare(o.size() - 4, 4, ".csv") == 0;
    contour_path = (csv ? o.substr(0, o.size() - 4) : o) + ".contours.json";
  }
  // Validate the outputs before the long computation.
  Sink sink(a.c.out, out);

  Progress progress;
  if (a.progress) {
    progress = [&err](std::size_t done, std::size_t total) {
      if (done == total || done % std::max<std::size_t>(1, total / 20) == 0) {
        err << "progress " << done << "/" << total << "\n";
      }
    };
  }
  const ViolationMap m = scan_2d(slice, parse_string(a.e.string), range, tol, threads, progress);

  json params = triple_json(a.t);
  params.update(a.e.to_json());
  params.update(json{{"x", a.x}, {"x_min", a.x_min}, {"x_max", a.x_max}, {"nx", a.nx},
                     {"y", a.y}, {"y_min", a.y_min}, {"y_max", a.y_max}, {"ny", a.ny}});
  const json prov = provenance("map", params, a.c);
  *sink << "# " << prov.dump() << "\n";
  *sink << a.x << "," << a.y << ",k_max,ell_star,plateau_k\n";
  int violating = 0;
  for (int j = 0; j < m.k_max.ny; ++j) {
    for (int i = 0; i < m.k_max.nx; ++i) {
      const double k = m.k_max(i, j);
      if (std::isnan(k)) {
        err << "warning: node " << a.x << "=" << fmt(m.k_max.xs[i]) << " " << a.y << "="
            << fmt(m.k_max.ys[j]) << " failed\n";
      } else if (k > 1.0 + 3.0 * m.error(i, j)) {
        ++violating;
      }
      *sink << fmt(m.k_max.xs[i]) << "," << fmt(m.k_max.ys[j]) << "," << fmt(k) << ","
            << fmt(m.ell_star(i, j)) << "," << fmt(m.plateau_k(i, j)) << "\n";
    }
  }
  if (!contour_path.empty()) {
    json doc = {{"level", 1.0},
                {"polylines", polylines_json(m.contours)},
                {"closed", closed_flags(m.contours)},
                {"plateau_polylines", polylines_json(m.plateau_contours)},
                {"plateau_closed", closed_flags(m.plateau_contours)},
                {"provenance", prov}};
    write_json_file(contour_path, doc);
  }
  const std::size_t total = m.k_max.values.size();
  err << "nodes " << total << ", failed " << m.failed_nodes << ", violating " << violating
      << ", contours " << m.contours.size() << "\n";
  return static_cast<double>(m.failed_nodes) > 0.01 * static_cast<double>(total) ? kPartialGrid : kOk;
}

struct DecoherenceArgs {
  Common c;
  Triple t;
  double xi_min = 0.01;
  double xi_max = 100.0;
  int xi_points = 41;
  std::vector<double> xi_values;
};

int cmd_decoherence(const DecoherenceArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<double> grid = a.xi_values;
  if (grid.empty()) {
    if (!(a.xi_min > 0.0) || !(a.xi_max > a.xi_min) || a.xi_points < 2) {
      throw InvalidParameter("xi grid needs 0 < xi-min < xi-max and at least 2 points");
    }
    grid.push_back(0.0);
    for (int i = 0; i < a.xi_points; ++i) {
      grid.push_back(a.xi_min * std::pow(a.xi_max / a.xi_min, static_cast<double>(i) / (a.xi_points - 1)));
    }
  }
  const Protocol3 p{{a.t.ra, a.t.phia}, {a.t.rb, a.t.phib}, {a.t.rc, a.t.phic},
                    MeasurementSpec::infinite(), a.c.channel()};
  const ToleranceConfig tol = a.c.tolerances();
  // One xi at a time so a failure only blanks its own row.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && grid[i] < grid[i - 1])) {
      throw InvalidParameter("xi values must be nonnegative and ascending");
    }
  }
  std::vector<double> ks(grid.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> why(grid.size());
  parallel_for(grid.size(), resolve_threads(a.c.threads), [&](std::size_t i) {
    try {
      ks[i] = decoherence_scan(p, {grid[i]}, tol).front().k3;
    } catch (const Error& e) {
      why[i] = e.what();
    }
  });
  int failed = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isnan(ks[i])) {
      ++failed;
      err << "warning: xi=" << fmt(grid[i]) << " failed: " << why[i] << "\n";
    }
  }
  json params = triple_json(a.t);
  params.update(json{{"xi_min", a.xi_min}, {"xi_max", a.xi_max}, {"xi_points", a.xi_points},
                     {"xi_values", a.xi_values}});
  Common c = a.c;
  c.xi = 0.0;  // the swept quantity
  Sink sink(a.c.out, out);
  *sink << "# " << provenance("decoherence", std::move(params), c).dump() << "\n";
  *sink << "xi,K3\n";
  for (std::size_t i = 0; i < grid.size(); ++i) *sink << fmt(grid[i]) << "," << fmt(ks[i]) << "\n";
  return static_cast<double>(failed) > 0.01 * static_cast<double>(grid.size()) ? kPartialGrid : kOk;
}

// ------------------------------------------------------------------ validate

struct SuiteRow {
  std::string name;
  std::size_t cases;
  double max_dev;
  double limit;
  bool pass() const { return max_dev < limit; }
};

GaussKernel closed_kernel(const SqueezeParams& a, const SqueezeParams& b, const ToleranceConfig& tol,
                          bool flip) {
  GaussKernel k = kernel_coefficients(a, b, tol.singular_threshold);
  if (flip) k.c_cross = -k.c_cross;
  return k;
}

double closed_general(const SqueezeParams& a, const SqueezeParams& b, double ell,
                      const ToleranceConfig& tol, bool flip) {
  const GaussKernel k = closed_kernel(a, b, tol, flip);
  const double scale = std::abs(k.prefactor);
  const engine::SeriesSum s = engine::alternating_sum(k, ell, tol.series_tail_tol / scale,
                                                      tol.quadrature_rel_tol, tol.max_terms);
  return (k.prefactor * s.value).real();
}

// NaN if any entry is NaN, so a failed case fails its suite.
double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (std::isnan(x)) return x;
    m = std::max(m, x);
  }
  return m;
}

}  // namespace

int run_validate(const ValidateOptions& opt, const ToleranceConfig& tol, std::ostream& out,
                 std::ostream& err) {
  if (opt.cases < 1) throw InvalidParameter("--cases must be >= 1");
  tol.validate();
  const int threads = resolve_threads(opt.threads);
  const bool flip = opt.inject_sign_flip;
  std::vector<SuiteRow> rows;

  {
    const auto cases = oracle::random_fixture_cases(opt.seed, 50 * opt.cases, 1e-3);
    double worst = 0.0;
    for (const auto& fc : cases) {
      const cplx closed = oracle::det_M_closed(fc.a, fc.b);
      const cplx numeric = oracle::det_M_numeric(fc.a, fc.b);
      worst = std::max(worst, std::abs(closed - numeric) / std::abs(closed));
    }
    rows.push_back({"det_M closed vs 6x6", cases.size(), worst, 1e-10});
  }
  {
    const auto cases = oracle::random_fixture_cases(opt.seed + 1, opt.cases);
    double worst = 0.0;
    for (const auto& fc : cases) {
      const cplx e = oracle::jmj_explicit(fc.a, fc.b)(fc.Qt, fc.Qb);
      const cplx n = oracle::jmj_numeric(fc.a, fc.b, fc.Qt, fc.Qb);
      worst = std::max(worst, std::abs(e - n) / std::max(1.0, std::abs(e)));
    }
    rows.push_back({"quadratic form J M^-1 J", cases.size(), worst, 1e-10});
  }
  {
    const auto cases = oracle::random_fixture_cases(opt.seed + 2, opt.cases);
    double worst = 0.0;
    for (const auto& fc : cases) {
      const GaussKernel k = closed_kernel(fc.a, fc.b, tol, flip);
      const cplx kern = k.prefactor * std::exp(k.c_tilde * fc.Qt * fc.Qt + k.c_bar * fc.Qb * fc.Qb +
                                                k.c_cross * fc.Qt * fc.Qb);
      const cplx ref = oracle::integrand(fc.a, fc.b, fc.Qt, fc.Qb, tol.singular_threshold);
      worst = std::max(worst, std::abs(kern - ref) / std::max(std::abs(ref), 1e-300));
    }
    rows.push_back({"pointwise kernel", cases.size(), worst, 1e-9});
  }
  {
    const auto pairs = oracle::random_fixture_cases(opt.seed + 3, opt.cases);
    std::mt19937_64 rng(opt.seed + 4);
    std::uniform_real_distribution<double> ell_dist(0.2, 5.0);
    std::vector<double> ells;
    for (std::size_t i = 0; i < pairs.size(); ++i) ells.push_back(ell_dist(rng));
    std::vector<double> dev(pairs.size(), 0.0);
    std::atomic<int> failures{0};
    parallel_for(pairs.size(), threads, [&](std::size_t i) {
      try {
        const double v = closed_general(pairs[i].a, pairs[i].b, ells[i], tol, flip);
        const double ref = oracle::oracle_correlator(pairs[i].a, pairs[i].b, ells[i], tol);
        dev[i] = std::abs(v - ref);
      } catch (const Error&) {
        dev[i] = std::numeric_limits<double>::quiet_NaN();
        ++failures;
      }
    });
    if (failures > 0) err << "dual path: " << failures << " configurations failed\n";
    rows.push_back({"dual-path correlator vs oracle", pairs.size(), max_of(dev), 1e-6});
  }
  const int n_lim = std::min(opt.cases, 20);
  {
    const auto pairs = oracle::random_fixture_cases(opt.seed + 5, n_lim);
    double worst = 0.0;
    for (const auto& fc : pairs) {
      const GaussKernel k = closed_kernel(fc.a, fc.b, tol, flip);
      const auto quad = engine::signed_quadrant_integral(k);
      const double plateau = quad ? (k.prefactor * *quad).real() : std::numeric_limits<double>::quiet_NaN();
      const double far = closed_general(fc.a, fc.b, 30.0, tol, flip);
      worst = std::isnan(plateau) ? plateau : std::max(worst, std::abs(plateau - far));
    }
    rows.push_back({"plateau vs ell = 30", pairs.size(), worst, 1e-4});
  }
  {
    std::mt19937_64 rng(opt.seed + 6);
    std::uniform_real_distribution<double> s_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> ell_dist(0.2, 5.0);
    double worst = 0.0;
    for (int i = 0; i < n_lim; ++i) {
      const double sa = s_dist(rng);
      const double sb = s_dist(rng);
      const double ell = ell_dist(rng);
      const double series = correlator_real_squeezing(sa, sb, {ell}, tol).value;
      const double overlap = oracle::zero_angle_overlap(sa, sb, ell, tol);
      worst = std::max(worst, std::abs(series - overlap));
    }
    rows.push_back({"zero-angle series vs overlap", static_cast<std::size_t>(n_lim), worst, 1e-9});
  }
  {
    const auto pairs = oracle::random_fixture_cases(opt.seed + 7, n_lim);
    double worst = 0.0;
    for (const auto& fc : pairs) {
      const double v = correlator(fc.a, fc.a, {1.0}, {}, tol).value;
      worst = std::max(worst, std::abs(v - 1.0));
    }
    rows.push_back({"equal-time identity", pairs.size(), worst, 1e-15});
  }

  bool all = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %7s %12s %10s  %s\n", "suite", "cases", "max_dev", "limit",
                "result");
  out << line;
  for (const SuiteRow& r : rows) {
    all = all && r.pass();
    std::snprintf(line, sizeof line, "%-32s %7zu %12.3e %10.1e  %s\n", r.name.c_str(), r.cases,
                  r.max_dev, r.limit, r.pass() ? "PASS" : "FAIL");
    out << line;
  }
  return all ? kOk : kValidateFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leggett-Garg strings for squeezed states", "lgi"};
  app.set_version_flag("--version", LGSQ_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string section;
  for (int i = 1; i < argc && section.empty(); ++i) {
    for (const char* c : kCommands) {
      if (std::string(argv[i]) == c) section = c;
    }
  }
  app.config_formatter(std::make_shared<JsonConfig>(section));
  app.set_config("--config", "", "JSON file mirroring the flags; flags take precedence");

  CorrArgs corr;
  auto* c_corr = app.add_subcommand("corr", "two-time correlator");
  c_corr->add_option("--ra", corr.ra, "squeezing amplitude at t_a")->required();
  c_corr->add_option("--phia", corr.phia, "squeezing angle at t_a")->required();
  c_corr->add_option("--rb", corr.rb, "squeezing amplitude at t_b")->required();
  c_corr->add_option("--phib", corr.phib, "squeezing angle at t_b")->required();
  c_corr->add_option("--ell", corr.ell, "bin width, or 'inf'")->capture_default_str();
  c_corr->add_option("--engine", corr.engine, "force a series engine (finite ell, off the singular set)")
      ->check(CLI::IsMember({"auto", "fourier", "rectangles", "semi", "closed_form"}))
      ->capture_default_str();
  add_channel(c_corr, corr.c);
  add_tolerances(c_corr, corr.c);

  K3Args k3;
  auto* c_k3 = app.add_subcommand("k3", "three-time Leggett-Garg strings");
  add_triple(c_k3, k3.t, true);
  c_k3->add_option("--ell", k3.ell, "bin width, or 'inf'")->capture_default_str();
  c_k3->add_flag("--prime", k3.prime, "report K3' as the primary value");
  c_k3->add_option("--margin-factor", k3.margin_factor, "violation margin in units of the error")
      ->capture_default_str();
  add_channel(c_k3, k3.c);
  add_tolerances(c_k3, k3.c);

  ScanEllArgs scan;
  auto* c_scan = app.add_subcommand("scan-ell", "string profile over ell and its maximum");
  add_triple(c_scan, scan.t, false);
  add_ell_range(c_scan, scan.e);
  add_channel(c_scan, scan.c);
  add_tolerances(c_scan, scan.c);

  MapArgs map;
  auto* c_map = app.add_subcommand("map", "2D slice of ell-maximised strings with level-1 contours");
  add_triple(c_map, map.t, false);
  add_ell_range(c_map, map.e);
  const auto params = std::vector<std::string>{"r_a", "phi_a", "r_b", "phi_b", "r_c", "phi_c"};
  c_map->add_option("--x", map.x, "parameter on the first axis")->check(CLI::IsMember(params))->capture_default_str();
  c_map->add_option("--y", map.y, "parameter on the second axis")->check(CLI::IsMember(params))->capture_default_str();
  c_map->add_option("--x-min", map.x_min)->capture_default_str();
  c_map->add_option("--x-max", map.x_max)->capture_default_str();
  c_map->add_option("--y-min", map.y_min)->capture_default_str();
  c_map->add_option("--y-max", map.y_max)->capture_default_str();
  c_map->add_option("--nx", map.nx, "nodes on the first axis")->capture_default_str();
  c_map->add_option("--ny", map.ny, "nodes on the second axis")->capture_default_str();
  c_map->add_option("--contours", map.contours_path, "contour JSON (default: next to --out)");
  c_map->add_option("--threads", map.c.threads, "worker threads (default LGI_THREADS or all cores)");
  c_map->add_flag("--progress", map.progress, "report progress on stderr");
  add_channel(c_map, map.c);
  add_tolerances(c_map, map.c);

  DecoherenceArgs deco;
  auto* c_deco = app.add_subcommand("decoherence", "plateau K3 as a function of xi");
  add_triple(c_deco, deco.t, false);
  c_deco->add_option("--xi-min", deco.xi_min, "smallest nonzero xi of the log grid")->capture_default_str();
  c_deco->add_option("--xi-max", deco.xi_max)->capture_default_str();
  c_deco->add_option("--xi-points", deco.xi_points, "log-spaced points after xi = 0")->capture_default_str();
  c_deco->add_option("--xi-values", deco.xi_values, "explicit ascending xi list");
  c_deco->add_option("--threads", deco.c.threads, "worker threads (default LGI_THREADS or all cores)");
  c_deco->add_option("--xi-sign", deco.c.xi_sign, "sign of the xi shift on the cross term")
      ->check(CLI::IsMember({"paper", "physical"}))
      ->capture_default_str();
  add_tolerances(c_deco, deco.c);

  ValidateOptions val;
  Common val_common;
  auto* c_val = app.add_subcommand("validate", "closed-form paths against the independent oracle");
  c_val->add_option("--seed", val.seed)->capture_default_str();
  c_val->add_option("--cases", val.cases, "configurations per suite")->capture_default_str();
  c_val->add_option("--threads", val.threads, "worker threads (default LGI_THREADS or all cores)");
  add_tolerances(c_val, val_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  try {
    if (*c_corr) return cmd_corr(corr, out);
    if (*c_k3) return cmd_k3(k3, out);
    if (*c_scan) return cmd_scan_ell(scan, out, err);
    if (*c_map) return cmd_map(map, out, err);
    if (*c_deco) return cmd_decoherence(deco, out, err);
    if (*c_val) {
      Sink sink(val_common.out, out);
      return run_validate(val, val_common.tolerances(), *sink, err);
    }
  } catch (const ConvergenceFailure& e) {
    err << "error: " << e.what() << "\n";
    return kConvergence;
  } catch (const BranchAmbiguity& e) {
    err << "error: " << e.what() << "\n";
    return kConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}

}  // namespace lgsq::cli
