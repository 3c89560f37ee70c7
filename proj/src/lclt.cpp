#include "clexp/lclt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace clexp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

double gaussian_density(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// Trapezoid rule with one halving refinement. Returns the refined value
/// and whether the two levels agree within tol. The stated resolution is
/// per unit length, so long segments keep the same step size.
template <typename F>
std::pair<double, bool> trapezoid_refined(F&& f, double a, double b, int n, double tol) {
  if (b <= a) return {0.0, true};
  const int points = n * std::max(1, static_cast<int>(std::ceil(b - a)));
  auto trap = [&](int pts) {
    const double h = (b - a) / pts;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < pts; ++i) s += f(a + i * h);
    return s * h;
  };
  const double coarse = trap(points);
  const double fine = trap(2 * points);
  return {fine, std::abs(fine - coarse) <= tol};
}

}  // namespace

SpanInfo detect_span(const SpinSpace& space) {
  space.validate();
  std::vector<long long> values(space.f.begin(), space.f.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() < 2)
    throw std::domain_error("detect_span: f is constant on the spin space (Var_lambda(f) = 0)");

  long long h = 0;
  for (std::size_t i = 1; i < values.size(); ++i) h = std::gcd(h, values[i] - values.front());
  SpanInfo info;
  info.a = values.front();
  info.h = h;
  info.p = 0;
  info.q = (values.back() - values.front()) / h;
  return info;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_distance_to_normal(const SkStatistics& stats) {
  if (!(stats.variance > 0.0))
    throw std::domain_error("kolmogorov_distance_to_normal: D_k must be positive");
  const double sd = std::sqrt(stats.variance);
  double ks = 0.0;
  double cdf_before = 0.0;
  for (const auto& [s, p] : stats.mass) {
    const double z = (static_cast<double>(s) - stats.mean) / sd;
    const double normal = normal_cdf(z);
    ks = std::max(ks, std::abs(cdf_before - normal));
    cdf_before += p;
    ks = std::max(ks, std::abs(cdf_before - normal));
  }
  return ks;
}

namespace {

LcltTable lclt_table_impl(const std::map<long long, double>& mass,
                          const std::map<long long, double>* radii, double mean,
                          double variance, const SpanInfo& span, long long volume, bool exact) {
  if (!(variance > 0.0)) throw std::domain_error("lclt_discrepancy: D_k must be positive");
  const double sd = std::sqrt(variance);
  LcltTable table;
  table.exact = exact;
  for (long long b = span.p * volume; b <= span.q * volume; ++b) {
    LcltRow row;
    row.b = b;
    row.s_value = volume * span.a + b * span.h;
    auto it = mass.find(row.s_value);
    row.prob = it == mass.end() ? 0.0 : it->second;
    row.z = (static_cast<double>(row.s_value) - mean) / sd;
    row.gauss = gaussian_density(row.z);
    row.discrepancy = std::abs(sd / static_cast<double>(span.h) * row.prob - row.gauss);
    if (radii) {
      auto rit = radii->find(row.s_value);
      row.conf_radius = rit == radii->end() ? 0.0 : sd / static_cast<double>(span.h) * rit->second;
    }
    if (row.discrepancy > table.sup_discrepancy) {
      table.sup_discrepancy = row.discrepancy;
      table.argmax_b = b;
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

LcltTable lclt_discrepancy(const SkStatistics& stats, const SpanInfo& span, long long volume) {
  return lclt_table_impl(stats.mass, nullptr, stats.mean, stats.variance, span, volume, true);
}

LcltTable lclt_discrepancy_mc(const McResult& mc, const SpanInfo& span, long long volume) {
  std::map<long long, double> mass, radii;
  for (const auto& [s, row] : mc.mass) {
    mass[s] = row.p_hat;
    radii[s] = row.conf_radius;
  }
  return lclt_table_impl(mass, &radii, mc.s_mean, mc.s_variance, span, volume, false);
}

IntegralDecomposition integral_decomposition(const ExactGibbs& g, const SpanInfo& span,
                                             double B, double delta, int grid_points) {
  const auto& st = g.stats();
  if (!(st.variance > 0.0))
    throw std::domain_error("integral_decomposition: D_k must be positive");
  const double sd = std::sqrt(st.variance);
  const double t_mid = delta * sd;
  const double t_max = M_PI / static_cast<double>(span.h) * sd;
  if (!(B > 0.0) || !(B < t_mid) || !(t_mid <= t_max + 1e-12))
    throw std::domain_error("integral_decomposition: need 0 < B < delta sqrt(Dk) <= (pi/h) sqrt(Dk)");

  auto mu_centered = [&](double t) {
    const double s = t / sd;
    return std::exp(std::complex<double>(0.0, -s * st.mean)) * g.charfn_phase(s);
  };
  auto modulus = [&](double t) { return std::abs(mu_centered(t)); };

  const double tol = 1e-7;
  IntegralDecomposition out;
  bool ok = true;

  auto [i1, ok1] = trapezoid_refined(
      [&](double t) { return std::abs(mu_centered(t) - std::exp(-0.5 * t * t)); }, 0.0, B,
      grid_points, tol);
  out.i1 = 2.0 * i1;
  ok = ok && ok1;

  auto [i2, ok2] = trapezoid_refined([](double t) { return std::exp(-0.5 * t * t); }, B,
                                     B + 40.0, grid_points, tol);
  out.i2 = 2.0 * i2;
  ok = ok && ok2;

  auto [i3, ok3] = trapezoid_refined(modulus, B, t_mid, grid_points, tol);
  out.i3 = 2.0 * i3;
  ok = ok && ok3;

  auto [i4, ok4] = trapezoid_refined(modulus, t_mid, t_max, grid_points, tol);
  out.i4 = 2.0 * i4;
  ok = ok && ok4;

  out.majorant = (out.i1 + out.i2 + out.i3 + out.i4) / kTwoPi;
  out.grids_converged = ok;
  return out;
}

CharfnBoundReport charfn_bound_check(const ExactGibbs& g, CharfnRegime regime, double constant,
                                     double delta, const SpanInfo& span, int grid_points) {
  if (!(constant > 0.0))
    throw std::domain_error(
        "charfn_bound_check: the bound constant is not positive; "
        "see the bounds report positivity flags");
  const auto& st = g.stats();
  if (!(st.variance > 0.0)) throw std::domain_error("charfn_bound_check: D_k must be positive");
  const double sd = std::sqrt(st.variance);
  const double vol = static_cast<double>(g.region().size());

  CharfnBoundReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double fp_allowance = 1e-12;

  auto add_row = [&](double t, double bound) {
    CharfnBoundRow row;
    row.t = t;
    row.modulus = std::abs(g.charfn_phase(t / sd));  // |mu(e^{it Sbar})|, mean phase drops out
    row.bound = bound;
    row.holds = row.modulus <= bound + fp_allowance;
    const double margin = bound - row.modulus;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.t_worst = t;
    }
    rep.all_hold = rep.all_hold && row.holds;
    rep.rows.push_back(row);
  };

  if (regime == CharfnRegime::quadratic) {
    const double t_end = delta * sd;
    for (int i = 0; i < grid_points; ++i) {
      const double t = t_end * static_cast<double>(i) / grid_points;  // strictly below delta sqrt(Dk)
      add_row(t, std::exp(-t * t * constant * vol / st.variance));
    }
  } else {
    const double t_lo = delta * sd;
    const double t_hi = M_PI / static_cast<double>(span.h) * sd;
    if (!(t_lo <= t_hi + 1e-12))
      throw std::domain_error("charfn_bound_check: delta must not exceed pi/h");
    const double bound = std::exp(-constant * vol);
    for (int i = 0; i < grid_points; ++i) {
      const double t =
          grid_points == 1 ? t_lo : t_lo + (t_hi - t_lo) * static_cast<double>(i) / (grid_points - 1);
      add_row(t, bound);
    }
  }
  return rep;
}

DecimationReport decimation_experiment(std::shared_ptr<const Region> full_region,
                                       const SpinSpace& space, const PairPotential& phi,
                                       const BoundaryCondition& base_bc, double beta, int r0,
                                       int n_samples, std::uint64_t seed, double t,
                                       PairConvention conv, std::uint64_t budget) {
  if (r0 < 1) throw std::invalid_argument("decimation_experiment: r0 must be >= 1");

  std::vector<Site> sub_sites, ext_sites;
  for (const Site& s : full_region->sites()) {
    bool on_sublattice = true;
    for (int c : s.x) on_sublattice = on_sublattice && (c % r0 == 0);
    (on_sublattice ? sub_sites : ext_sites).push_back(s);
  }
  if (sub_sites.empty())
    throw std::invalid_argument("decimation_experiment: sublattice is empty");

  auto sublattice = std::make_shared<const Region>(sub_sites);

  const ExactGibbs full =
      ExactGibbs::build(full_region, space, phi, base_bc, beta, conv, budget);
  const double d_k = full.stats().variance;
  if (!(d_k > 0.0)) throw std::domain_error("decimation_experiment: D_k must be positive");
  const double phase = t / std::sqrt(d_k);

  DecimationReport rep;
  rep.sublattice = sublattice;
  rep.d_k_full = d_k;
  rep.phase = phase;

  auto conditional_modulus = [&](const std::vector<int>& omega_prime) {
    std::map<Site, int> assign;
    for (std::size_t i = 0; i < ext_sites.size(); ++i) assign[ext_sites[i]] = omega_prime[i];
    const BoundaryCondition composite =
        BoundaryCondition::composite(full_region, std::move(assign), base_bc);
    const ExactGibbs cond =
        ExactGibbs::build(sublattice, space, phi, composite, beta, conv, budget);
    return std::abs(cond.charfn_phase(phase));
  };

  DetRng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    DecimationSample sample;
    sample.omega_prime.resize(ext_sites.size());
    for (auto& lbl : sample.omega_prime)
      lbl = static_cast<int>(rng.next_index(space.size()));
    sample.modulus = conditional_modulus(sample.omega_prime);
    rep.sup_modulus = std::max(rep.sup_modulus, sample.modulus);
    rep.samples.push_back(std::move(sample));
  }

  // Law of total probability over all omega' assignments, exact:
  //   mu(sigma_sub) = sum_w' mu(ext = w') mu_cond^{w'}(sigma_sub)
  const std::size_t m = space.size();
  double ext_states = std::pow(static_cast<double>(m), static_cast<double>(ext_sites.size()));
  double sub_states = std::pow(static_cast<double>(m), static_cast<double>(sub_sites.size()));
  if (ext_states * sub_states <= static_cast<double>(budget)) {
    const std::uint64_t n_ext = static_cast<std::uint64_t>(ext_states);
    const std::uint64_t n_sub = static_cast<std::uint64_t>(sub_states);

    // index maps: full config -> (sub assignment, ext assignment)
    std::vector<std::size_t> sub_index_of, ext_index_of;
    for (const Site& s : sub_sites) sub_index_of.push_back(*full_region->index_of(s));
    for (const Site& s : ext_sites) ext_index_of.push_back(*full_region->index_of(s));

    std::vector<double> marginal_sub(n_sub, 0.0), marginal_ext(n_ext, 0.0);
    for (std::uint64_t cfg = 0; cfg < full.config_count(); ++cfg) {
      const double p = full.probability(cfg);
      std::uint64_t si = 0, mult = 1;
      for (std::size_t i = 0; i < sub_index_of.size(); ++i) {
        si += static_cast<std::uint64_t>(full.label_of(cfg, sub_index_of[i])) * mult;
        mult *= m;
      }
      std::uint64_t ei = 0;
      mult = 1;
      for (std::size_t i = 0; i < ext_index_of.size(); ++i) {
        ei += static_cast<std::uint64_t>(full.label_of(cfg, ext_index_of[i])) * mult;
        mult *= m;
      }
      marginal_sub[si] += p;
      marginal_ext[ei] += p;
    }

    std::vector<double> mixture(n_sub, 0.0);
    std::vector<int> omega(ext_sites.size());
    for (std::uint64_t ei = 0; ei < n_ext; ++ei) {
      std::uint64_t rest = ei;
      for (std::size_t i = 0; i < omega.size(); ++i) {
        omega[i] = static_cast<int>(rest % m);
        rest /= m;
      }
      std::map<Site, int> assign;
      for (std::size_t i = 0; i < ext_sites.size(); ++i) assign[ext_sites[i]] = omega[i];
      const BoundaryCondition composite =
          BoundaryCondition::composite(full_region, std::move(assign), base_bc);
      const ExactGibbs cond =
          ExactGibbs::build(sublattice, space, phi, composite, beta, conv, budget);
      for (std::uint64_t sj = 0; sj < n_sub; ++sj)
        mixture[sj] += marginal_ext[ei] * cond.probability(sj);
    }

    rep.ltp_checked = true;
    for (std::uint64_t sj = 0; sj < n_sub; ++sj)
      rep.ltp_max_diff = std::max(rep.ltp_max_diff, std::abs(mixture[sj] - marginal_sub[sj]));
  }

  return rep;
}

}  // namespace clexp
