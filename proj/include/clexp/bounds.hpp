#pragma once

#include <optional>
#include <vector>

#include "clexp/cluster.hpp"
#include "clexp/model.hpp"
#include "clexp/polymer.hpp"

namespace clexp {

/// a_beta = (1+C)^2 e^4 sum_{0<||y||<=R} sup_{a,b} |exp(-beta Phi_y(a,b)) - 1|.
double a_beta(double C, double beta, const PairPotential& phi, const SpinSpace& space, int R, int d);

struct BetaCResult {
  double beta_c = 0.0;
  bool infinite = false;     // zero potential: the condition holds for every beta
  double residual = 0.0;     // |Ce + a_{beta_c} - 1| at the solution
};
/// Largest beta with Ce + a_beta(beta) < 1, by bisection to 1e-10.
BetaCResult beta_c_solve(double C, const PairPotential& phi, const SpinSpace& space, int R, int d);

struct SeriesConstants {
  double a_delta = 0.0;  // -ln(1 - q), q = delta ||f||
  double b_delta = 0.0;  // sum_{n>=3} [(n-1) q^{n-2} + q^{n-1}], closed form
};
SeriesConstants series_constants(double delta, double f_norm);

struct AlphaConstants {
  double alpha_delta_beta = 0.0;  // A(delta) + a_beta with C = delta ||f||
  double alpha_beta = 0.0;        // t = 0 path: a_beta with C = 0
  double alpha_bar_c_beta = 0.0;  // e^{2(2+c)} sum ||e^{-beta Phi} - 1||
  bool alpha_delta_beta_valid = false;  // < 1
  bool alpha_beta_valid = false;
  bool alpha_bar_valid = false;
};
AlphaConstants alpha_constants(double delta, double beta, double c, const PairPotential& phi,
                               const SpinSpace& space, int R, int d);

struct PropConstants {
  double d_beta = 0.0;        // e^{-2 beta |||Phi|||} lambda(f^2)/lambda(E)
  double norm_phi = 0.0;      // |||Phi||| including the analytic tail when available
  double gnedenko_dx = 0.0;   // -ln sup |E_nu e^{itX}| over [eps, 2pi/h - eps]
  double c_b = 0.0;           // -ln sup over sampled omega, t in [delta, pi/h]
  double c_c = 0.0;           // -ln(eps_c + e^{-c0}) per the beta-threshold construction
  double c0_nu = 0.0;         // Gnedenko constant of nu = lambda/lambda(E) on [delta, pi/h]
  double eps_c = 0.0;         // (1 - e^{-c0})/2 unless overridden
  double beta_prime_delta = 0.0;  // analytic threshold making the construction valid
  bool grids_converged = false;   // refinement halving moved results < 1e-6
};
/// Grid sups use `grid_points` points plus one halving refinement.
PropConstants prop_constants(const SpinSpace& space, const PairPotential& phi, double beta,
                             double eps, double delta, const Region& box,
                             const std::vector<BoundaryCondition>& bc_samples,
                             std::optional<double> eps_c_override = std::nullopt,
                             int grid_points = 4096);

struct PolymerGasConstants {
  double z0 = 0.0;
  double big_k = 0.0;         // K = sum Psi^{1/2}
  double big_b = 0.0;         // B(z0,K) = sqrt(z0) K / (1 - sqrt(z0) K)
  double big_c = 0.0;         // C(z0,K) = z0 exp(B(sqrt(z0), K))
  bool b_valid = false;       // sqrt(z0) K < 1
  bool c_valid = false;       // z0^{1/4} K < 1 and C < 1
};
/// Hardcore polymer-gas convergence constants from K and z0.
/// Throws when sqrt(z0) K >= 1.
PolymerGasConstants polymer_gas_constants(double z0, double big_k);

/// Phi_bar(r0) = max of the pair sup-norm over r0 <= ||x|| <= truncation.
double phi_bar(const PairPotential& phi, int d, int r0);

/// K for Psi(x) = ||Phi_{x,0}|| / Phi_bar(r0) on the sublattice r0 Z^d,
/// summed over ||x|| <= cutoff_radius (Psi(0) = 1).
double sublattice_big_k(const PairPotential& phi, int d, int r0, double cutoff_radius);

struct LemmaConstants {
  // high-temperature route
  double d_beta = 0.0;
  double a_beta_4d = 0.0;     // a_beta at C = 4 delta ||f||
  double big_d = 0.0;         // quadratic charfn bound constant
  bool d_positive = false;
  double big_c = 0.0;         // c - alpha_beta - alpha_bar_{c,beta}
  bool c_positive = false;
  // decimated route
  double phi_bar_r0 = 0.0;
  double big_k = 0.0;
  double z0_decim = 0.0;      // max{4 delta ||f||, beta Phi_bar e^{beta Phi_bar}}
  double phi_cam = 0.0;       // varphi_beta(delta, r0)
  double d_cam = 0.0;
  bool d_cam_positive = false;
  double z0_cam = 0.0;        // beta Phi_bar e^{2c + beta Phi_bar}
  double z1_cam = 0.0;        // beta Phi_bar e^{beta Phi_bar}
  double c_cam = 0.0;
  bool c_cam_positive = false;
  bool decim_prereqs_ok = false;  // all CCT prerequisites along the chain
  bool cam_prereqs_ok = false;
};
LemmaConstants lemma_constants(double delta, double beta, double c, int r0,
                               const SpinSpace& space, const PairPotential& phi, int d,
                               double k_cutoff_radius);

struct KpPinnedReport {
  double lhs = 0.0;       // truncated pinned sum (a lower bound of the series)
  double rhs = 0.0;       // (Ce + a_beta) |pin support|
  double margin = 0.0;    // rhs - lhs
  bool holds = false;
  std::size_t polymer_count = 0;
};
/// Verifies the pinned Kotecky-Preiss-style bound
///   sum_{R: support(R) meets pin} C^{|gamma1|} zeta_hat(gamma2) e^{|support|}
///     <= (Ce + a_beta) |pin support|
/// over the polymers enumerable within the cutoffs.
KpPinnedReport kp_pinned_verify(const ActivityContext& ctx, double C, const Polymer& pin,
                                const PolymerCutoffs& cutoffs);

}  // namespace clexp
