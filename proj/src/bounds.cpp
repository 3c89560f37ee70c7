#include "clexp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "clexp/lclt.hpp"

namespace clexp {

namespace {

constexpr double kE4 = 54.598150033144239078110261202861;  // e^4

/// sum over 0 < ||y|| <= R of sup_{a,b} |exp(-beta Phi_y(a,b)) - 1|
double exp_phi_norm_sum(double beta, const PairPotential& phi, const SpinSpace& space, int R, int d) {
  const std::size_t m = space.size();
  double total = 0.0;
  for (const Site& y : displacements_within(d, R)) {
    double sup = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        sup = std::max(sup, std::abs(std::expm1(-beta * phi.energy(y.x, static_cast<int>(a),
                                                                   static_cast<int>(b)))));
    total += sup;
  }
  return total;
}

struct GridSup {
  double sup = 0.0;
  bool converged = false;
};

/// Sup of f over [lo, hi] on a grid with one halving refinement.
template <typename F>
GridSup grid_sup(F&& f, double lo, double hi, int points) {
  auto pass = [&](int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
      s = std::max(s, f(t));
    }
    return s;
  };
  GridSup out;
  const double coarse = pass(points);
  out.sup = pass(2 * points);
  out.converged = std::abs(out.sup - coarse) < 1e-6;
  return out;
}

std::optional<PolymerGasConstants> polymer_gas_try(double z0, double big_k) {
  if (!(z0 > 0.0) || !(big_k > 0.0)) return std::nullopt;
  const double root = std::sqrt(z0) * big_k;
  if (!(root < 1.0)) return std::nullopt;
  PolymerGasConstants out;
  out.z0 = z0;
  out.big_k = big_k;
  out.big_b = root / (1.0 - root);
  out.b_valid = true;
  const double quarter = std::pow(z0, 0.25) * big_k;  // B(sqrt(z0), K) needs z0^{1/4} K < 1
  if (quarter < 1.0) {
    out.big_c = z0 * std::exp(quarter / (1.0 - quarter));
    out.c_valid = out.big_c < 1.0;
  } else {
    out.big_c = std::numeric_limits<double>::infinity();
    out.c_valid = false;
  }
  return out;
}

/// C(z,K) B(sqrt(z),K) / (1 - C(z,K)), the pinned-series convergence
/// factor; nullopt when any prerequisite fails.
std::optional<double> pinned_series_factor(double z, double big_k) {
  const auto c = polymer_gas_try(z, big_k);
  if (!c || !c->c_valid) return std::nullopt;
  const double quarter = std::pow(z, 0.25) * big_k;
  const double b_of_sqrt = quarter / (1.0 - quarter);
  return c->big_c * b_of_sqrt / (1.0 - c->big_c);
}

}  // namespace

double a_beta(double C, double beta, const PairPotential& phi, const SpinSpace& space, int R, int d) {
  if (beta < 0.0) throw std::domain_error("a_beta: beta must be >= 0");
  return (1.0 + C) * (1.0 + C) * kE4 * exp_phi_norm_sum(beta, phi, space, R, d);
}

BetaCResult beta_c_solve(double C, const PairPotential& phi, const SpinSpace& space, int R, int d) {
  if (!(C > 0.0 && C * M_E < 1.0))
    throw std::domain_error("beta_c_solve: need 0 < C < 1/e");
  auto condition = [&](double beta) {
    return C * M_E + a_beta(C, beta, phi, space, R, d) < 1.0;
  };

  BetaCResult out;
  if (exp_phi_norm_sum(1.0, phi, space, R, d) == 0.0) {
    out.infinite = true;
    out.beta_c = std::numeric_limits<double>::infinity();
    return out;
  }

  double lo = 0.0, hi = 1.0;
  while (condition(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) {
      out.infinite = true;
      out.beta_c = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (condition(mid)) lo = mid;
    else hi = mid;
  }
  out.beta_c = lo;
  out.residual = std::abs(C * M_E + a_beta(C, lo, phi, space, R, d) - 1.0);
  return out;
}

SeriesConstants series_constants(double delta, double f_norm) {
  const double q = delta * f_norm;
  if (!(q >= 0.0 && q < 1.0)) throw std::domain_error("series_constants: need delta ||f|| in [0, 1)");
  SeriesConstants out;
  out.a_delta = -std::log1p(-q);
  out.b_delta = q / ((1.0 - q) * (1.0 - q)) + q / (1.0 - q) + q * q / (1.0 - q);
  return out;
}

AlphaConstants alpha_constants(double delta, double beta, double c, const PairPotential& phi,
                               const SpinSpace& space, int R, int d) {
  const double f_norm = space.f_norm();
  const double sum = exp_phi_norm_sum(beta, phi, space, R, d);
  AlphaConstants out;
  out.alpha_delta_beta =
      series_constants(delta, f_norm).a_delta +
      (1.0 + delta * f_norm) * (1.0 + delta * f_norm) * kE4 * sum;
  out.alpha_beta = kE4 * sum;
  out.alpha_bar_c_beta = std::exp(2.0 * (2.0 + c)) * sum;
  out.alpha_delta_beta_valid = out.alpha_delta_beta < 1.0;
  out.alpha_beta_valid = out.alpha_beta < 1.0;
  out.alpha_bar_valid = out.alpha_bar_c_beta < 1.0;
  return out;
}

PropConstants prop_constants(const SpinSpace& space, const PairPotential& phi, double beta,
                             double eps, double delta, const Region& box,
                             const std::vector<BoundaryCondition>& bc_samples,
                             std::optional<double> eps_c_override, int grid_points) {
  space.validate();
  if (!(space.var_lambda_f() > 0.0))
    throw std::domain_error("prop_constants: f is degenerate (Var_lambda(f) = 0)");
  const SpanInfo span = detect_span(space);
  const double h = static_cast<double>(span.h);
  if (!(delta > 0.0 && delta < M_PI / h))
    throw std::domain_error("prop_constants: need 0 < delta < pi/h");
  if (!(eps > 0.0 && eps < M_PI / h))
    throw std::domain_error("prop_constants: need 0 < eps < pi/h");

  PropConstants out;
  const int R = phi.truncation_radius();
  const int d = box.dim();
  PotentialNorm norm = potential_norm(phi, R, d);
  out.norm_phi = norm.partial_sum + norm.tail_bound.value_or(0.0);
  out.d_beta = std::exp(-2.0 * beta * out.norm_phi) * space.lambda_f2() / space.lambda_total();

  const double lambda_e = space.lambda_total();
  auto nu_charfn = [&](double t) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t e = 0; e < space.size(); ++e)
      acc += space.weights[e] / lambda_e *
             std::exp(std::complex<double>(0.0, t * space.f[e]));
    return std::abs(acc);
  };

  bool converged = true;
  {
    const GridSup g = grid_sup(nu_charfn, eps, 2.0 * M_PI / h - eps, grid_points);
    out.gnedenko_dx = -std::log(g.sup);
    converged = converged && g.converged;
  }
  {
    const GridSup g = grid_sup(nu_charfn, delta, M_PI / h, grid_points);
    out.c0_nu = -std::log(g.sup);
    converged = converged && g.converged;
    out.eps_c = eps_c_override.value_or(0.5 * (1.0 - g.sup));
    if (!(out.eps_c + g.sup < 1.0))
      throw std::domain_error("prop_constants: eps_c + e^{-c0} must be < 1");
    out.c_c = -std::log(out.eps_c + g.sup);
  }

  // c_b: sup over sampled boundary conditions and box sites of the
  // single-site characteristic function on [delta, pi/h].
  {
    double worst = 0.0;
    bool all_converged = true;
    for (const BoundaryCondition& bc : bc_samples) {
      const PairTables tables = build_pair_tables(box, space, phi, bc);
      for (std::size_t x = 0; x < box.size(); ++x) {
        std::vector<double> mass(space.size());
        double nrm = 0.0;
        for (std::size_t e = 0; e < space.size(); ++e) {
          mass[e] = space.weights[e] * std::exp(-beta * tables.exterior_field[x][e]);
          nrm += mass[e];
        }
        auto site_charfn = [&](double t) {
          std::complex<double> acc{0.0, 0.0};
          for (std::size_t e = 0; e < space.size(); ++e)
            acc += mass[e] / nrm * std::exp(std::complex<double>(0.0, t * space.f[e]));
          return std::abs(acc);
        };
        const GridSup g = grid_sup(site_charfn, delta, M_PI / h, grid_points);
        worst = std::max(worst, g.sup);
        all_converged = all_converged && g.converged;
      }
    }
    out.c_b = -std::log(worst);
    converged = converged && all_converged;
  }

  // Analytic beta threshold for the Proposition (c) construction:
  // e^{2 beta |||Phi|||} - 1 < eps_c / (2||f|| + 1).
  const double target = out.eps_c / (2.0 * space.f_norm() + 1.0);
  out.beta_prime_delta = out.norm_phi > 0.0
                             ? std::log1p(target) / (2.0 * out.norm_phi)
                             : std::numeric_limits<double>::infinity();
  out.grids_converged = converged;
  return out;
}

PolymerGasConstants polymer_gas_constants(double z0, double big_k) {
  if (!(z0 > 0.0)) throw std::domain_error("polymer_gas_constants: z0 must be positive");
  if (!(big_k > 0.0)) throw std::domain_error("polymer_gas_constants: K must be positive");
  const auto c = polymer_gas_try(z0, big_k);
  if (!c) throw std::domain_error("polymer_gas_constants: sqrt(z0) K must be < 1");
  return *c;
}

double phi_bar(const PairPotential& phi, int d, int r0) {
  if (r0 < 1) throw std::domain_error("phi_bar: r0 must be >= 1");
  const long long r02 = static_cast<long long>(r0) * r0;
  double sup = 0.0;
  for (const Site& y : displacements_within(d, phi.truncation_radius()))
    if (squared_norm(y.x) >= r02) sup = std::max(sup, phi.sup_norm(y.x));
  return sup;
}

double sublattice_big_k(const PairPotential& phi, int d, int r0, double cutoff_radius) {
  const double bar = phi_bar(phi, d, r0);
  if (!(bar > 0.0))
    throw std::domain_error("sublattice_big_k: Phi_bar(r0) vanishes (potential has no tail)");
  const int max_m = static_cast<int>(cutoff_radius / r0);
  double big_k = 1.0;  // Psi(0) = 1
  // enumerate sublattice points r0 * m, m in [-max_m, max_m]^d \ {0}
  std::vector<int> m(d, -max_m);
  std::vector<int> x(d);
  while (true) {
    bool zero = true;
    for (int c : m) zero = zero && c == 0;
    if (!zero) {
      for (int i = 0; i < d; ++i) x[i] = m[i] * r0;
      if (euclid_norm(x) <= cutoff_radius) big_k += std::sqrt(phi.sup_norm(x) / bar);
    }
    int i = d - 1;
    while (i >= 0 && m[i] == max_m) {
      m[i] = -max_m;
      --i;
    }
    if (i < 0) break;
    ++m[i];
  }
  return big_k;
}

LemmaConstants lemma_constants(double delta, double beta, double c, int r0,
                               const SpinSpace& space, const PairPotential& phi, int d,
                               double k_cutoff_radius) {
  const double f_norm = space.f_norm();
  const double q = delta * f_norm;
  const SeriesConstants sc = series_constants(delta, f_norm);

  LemmaConstants out;
  const int R = phi.truncation_radius();
  PotentialNorm norm = potential_norm(phi, R, d);
  const double norm_phi = norm.partial_sum + norm.tail_bound.value_or(0.0);
  out.d_beta = std::exp(-2.0 * beta * norm_phi) * space.lambda_f2() / space.lambda_total();

  out.a_beta_4d = a_beta(4.0 * q, beta, phi, space, R, d);
  out.big_d = 0.5 * (std::cos(q) * out.d_beta - delta * f_norm * f_norm * f_norm -
                     sc.b_delta * f_norm * f_norm - f_norm * f_norm / q * out.a_beta_4d);
  out.d_positive = out.big_d > 0.0;

  const AlphaConstants ac = alpha_constants(delta, beta, c, phi, space, R, d);
  out.big_c = c - ac.alpha_beta - ac.alpha_bar_c_beta;
  out.c_positive = out.big_c > 0.0;

  out.phi_bar_r0 = phi_bar(phi, d, r0);
  if (!(out.phi_bar_r0 > 0.0)) return out;  // decimated route unavailable

  out.big_k = sublattice_big_k(phi, d, r0, k_cutoff_radius);
  out.z0_decim = std::max(4.0 * q, beta * out.phi_bar_r0 * std::exp(beta * out.phi_bar_r0));
  out.z0_cam = beta * out.phi_bar_r0 * std::exp(2.0 * c + beta * out.phi_bar_r0);
  out.z1_cam = beta * out.phi_bar_r0 * std::exp(beta * out.phi_bar_r0);

  if (const auto pg = polymer_gas_try(out.z0_decim, out.big_k); pg && pg->c_valid) {
    const double quarter = std::pow(out.z0_decim, 0.25) * out.big_k;
    const double b_of_sqrt = quarter / (1.0 - quarter);
    out.phi_cam = f_norm * (out.z0_decim / delta) * std::exp(b_of_sqrt) * b_of_sqrt /
                  (1.0 - pg->big_c);
    out.d_cam = 0.5 * (std::cos(q) * out.d_beta - 2.0 * delta * f_norm * f_norm * f_norm -
                       sc.b_delta * f_norm * f_norm - out.phi_cam);
    out.d_cam_positive = out.d_cam > 0.0;
    out.decim_prereqs_ok = true;
  }

  const auto factor0 = pinned_series_factor(out.z0_cam, out.big_k);
  const auto factor1 = pinned_series_factor(out.z1_cam, out.big_k);
  if (factor0 && factor1) {
    out.c_cam = c - *factor0 - *factor1;
    out.c_cam_positive = out.c_cam > 0.0;
    out.cam_prereqs_ok = true;
  }
  return out;
}

KpPinnedReport kp_pinned_verify(const ActivityContext& ctx, double C, const Polymer& pin,
                                const PolymerCutoffs& cutoffs) {
  if (!(C >= 0.0 && C * M_E < 1.0))
    throw std::domain_error("kp_pinned_verify: need 0 <= C < 1/e");
  const int R = ctx.potential().truncation_radius();
  const int d = ctx.region().dim();
  const double ab = a_beta(C, ctx.beta(), ctx.potential(), ctx.space(), R, d);
  if (!(C * M_E + ab < 1.0))
    throw std::domain_error("kp_pinned_verify: Ce + a_beta >= 1 (beta is not below beta_C)");

  KpPinnedReport rep;
  const std::vector<Polymer> family = enumerate_polymers(ctx.region(), ctx.potential(), cutoffs);
  for (const Polymer& r : family) {
    if ((r.support_mask & pin.support_mask) == 0) continue;
    const std::vector<Bond> g2 = r.gamma2();
    const double zeta_hat =
        g2.empty()
            ? 1.0
            : std::abs(activity(ctx, make_polymer(g2, ctx.region().size()), ActivityKind::zeta_hat));
    rep.lhs += std::pow(C, static_cast<double>(r.singleton_count())) * zeta_hat *
               std::exp(static_cast<double>(r.support.size()));
    ++rep.polymer_count;
  }
  rep.rhs = (C * M_E + ab) * static_cast<double>(pin.support.size());
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

}  // namespace clexp
