#pragma once

// Independent route to the correlator through the squeezed-state wave function
// and the coherent-state matrix element <Qt| U_a U_b^dagger |Qb>.
//
// Nothing here calls into the kernel or correlator modules; the two routes meet
// only in the tests.

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <vector>

#include "lgsq/core.hpp"

namespace lgsq::oracle {

using MMatrix = Eigen::Matrix<cplx, 6, 6>;
using SourceVector = Eigen::Matrix<cplx, 6, 1>;

/// Squeezed-state wave function Psi(Q) with z = exp(2i phi) tanh r.
cplx wavefunction(const SqueezeParams& p, double Q);

/// The symmetric 6x6 matrix of the coherent-state Gaussian integral,
/// ordered alpha = [Re u, Im u, Re v, Im v, Re w, Im w].
MMatrix build_M(const SqueezeParams& a, const SqueezeParams& b);

/// J = -sqrt(2) (0, 0, Qb, -i Qb, Qt, i Qt).
SourceVector source_vector(double Qt, double Qb);

/// -128 i [sin 2phi_a tanh r_a - sin 2phi_b tanh r_b - sin(2phi_a - 2phi_b) tanh r_a tanh r_b].
cplx det_M_closed(const SqueezeParams& a, const SqueezeParams& b);

/// LU determinant of build_M.
cplx det_M_numeric(const SqueezeParams& a, const SqueezeParams& b);

/// (1/2) J^T M^-1 J = qb2 Qb^2 + qt2 Qt^2 + cross Qb Qt, read off the explicit expansion.
struct QuadraticForm {
  cplx qb2;
  cplx qt2;
  cplx cross;

  cplx operator()(double Qt, double Qb) const { return qb2 * Qb * Qb + qt2 * Qt * Qt + cross * Qb * Qt; }
};

QuadraticForm jmj_explicit(const SqueezeParams& a, const SqueezeParams& b);

/// (1/2) J^T M^-1 J through a numeric solve of M x = J.
cplx jmj_numeric(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb);

/// <Qt| U_a U_b^dagger |Qb>. Throws SingularConfiguration if |det M| <= singular_threshold.
cplx matrix_element(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb,
                    double singular_threshold = 1e-8);

/// Psi_a^*(Qt) Psi_b(Qb) <Qt| U_a U_b^dagger |Qb>, the full correlator integrand before Re.
cplx integrand(const SqueezeParams& a, const SqueezeParams& b, double Qt, double Qb,
               double singular_threshold = 1e-8);

/// Brute-force correlator: nested adaptive Gauss-Kronrod over every ell x ell cell.
///
/// Slow by design. Throws SingularConfiguration on the det M = 0 manifold and
/// ConvergenceFailure when the cell count exceeds tol.max_terms per axis or an
/// inner quadrature fails to converge.
double oracle_correlator(const SqueezeParams& a, const SqueezeParams& b, double ell,
                         const ToleranceConfig& tol = {});

/// Real-squeezing correlator from the delta-function overlap: with the
/// squeezing variables real the matrix element pins Qb = exp(s_a - s_b) Qt, so
/// C = \int |Psi_a(Q)|^2 sgn_ell(Q) sgn_ell(exp(s_a - s_b) Q) dQ. Integrated
/// piecewise by Gauss-Kronrod between the sign breakpoints. s is the signed
/// log-scale (phi = 0: r, phi = pi/2: -r).
double zero_angle_overlap(double s_a, double s_b, double ell, const ToleranceConfig& tol = {});

struct FixtureCase {
  SqueezeParams a;
  SqueezeParams b;
  double Qt;
  double Qb;
};

/// Random non-singular fixture cases (|det M| >= min_det), deterministic in seed.
std::vector<FixtureCase> random_fixture_cases(std::uint64_t seed, int count, double min_det = 8.0);

/// JSON array of {a, b, Qt, Qb, matrix_element_re, matrix_element_im} records.
nlohmann::json dump_fixtures(const std::vector<FixtureCase>& cases);

}  // namespace lgsq::oracle
