#include "clexp/gibbs.hpp"

#include <cmath>
#include <stdexcept>

namespace clexp {

namespace {

/// Mixed-radix decode: label of site i in configuration n.
inline int decode_label(std::uint64_t config, std::size_t site_index, std::uint64_t radix) {
  for (std::size_t s = 0; s < site_index; ++s) config /= radix;
  return static_cast<int>(config % radix);
}

}  // namespace

ExactGibbs ExactGibbs::build(std::shared_ptr<const Region> region, SpinSpace space,
                             PairPotential phi, BoundaryCondition bc, double beta,
                             PairConvention conv, std::uint64_t budget) {
  space.validate();
  const std::size_t n = region->size();
  const std::uint64_t radix = space.size();

  // state count |E|^n with overflow/budget guard
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (count > budget / radix + 1) count = budget + 1;
    else count *= radix;
    if (count > budget)
      throw BudgetError("build_exact: |E|^|Lambda| exceeds the enumeration budget of " +
                        std::to_string(budget) + " states");
  }

  ExactGibbs g;
  g.region_ = std::move(region);
  g.space_ = std::move(space);
  g.phi_ = std::move(phi);
  g.bc_ = std::move(bc);
  g.beta_ = beta;
  g.conv_ = conv;

  const PairTables tables = build_pair_tables(*g.region_, g.space_, g.phi_, g.bc_, conv);
  std::vector<double> log_lambda(radix);
  for (std::uint64_t e = 0; e < radix; ++e) log_lambda[e] = std::log(g.space_.weights[e]);

  g.log_weights_.resize(count);
  std::vector<int> sigma(n, 0);
  for (std::uint64_t cfg = 0; cfg < count; ++cfg) {
    double h = 0.0;
    for (const auto& p : tables.pairs) h += p.energy[static_cast<std::size_t>(sigma[p.i]) * radix + sigma[p.j]];
    double lw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h += tables.exterior_field[i][sigma[i]];
      lw += log_lambda[sigma[i]];
    }
    g.log_weights_[cfg] = lw - beta * h;

    // mixed-radix increment, site 0 fastest
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::uint64_t>(++sigma[i]) < radix) break;
      sigma[i] = 0;
    }
  }

  g.log_z_ = log_sum_exp(g.log_weights_);

  // S_k statistics (eager: ExactGibbs is immutable once returned)
  SkStatistics st;
  for (std::uint64_t cfg = 0; cfg < count; ++cfg)
    st.mass[g.s_value(cfg)] += g.probability(cfg);
  double mean = 0.0;
  for (const auto& [s, p] : st.mass) mean += p * static_cast<double>(s);
  double var = 0.0;
  for (const auto& [s, p] : st.mass) {
    const double d = static_cast<double>(s) - mean;
    var += p * d * d;
  }
  st.mean = mean;
  st.variance = var;
  g.stats_ = std::move(st);
  return g;
}

int ExactGibbs::label_of(std::uint64_t config, std::size_t site_index) const {
  return decode_label(config, site_index, space_.size());
}

long long ExactGibbs::s_value(std::uint64_t config) const {
  const std::uint64_t radix = space_.size();
  long long s = 0;
  for (std::size_t i = 0; i < region_->size(); ++i) {
    s += space_.f[config % radix];
    config /= radix;
  }
  return s;
}

std::complex<double> ExactGibbs::charfn_phase(double s) const {
  std::complex<double> acc{0.0, 0.0};
  for (const auto& [sv, p] : stats_.mass)
    acc += p * std::exp(std::complex<double>(0.0, s * static_cast<double>(sv)));
  return acc;
}

std::complex<double> ExactGibbs::z_t_phase(double s) const {
  return z() * charfn_phase(s);
}

SkStatistics sk_statistics(const ExactGibbs& g) { return g.stats(); }

std::complex<double> characteristic_function(const ExactGibbs& g, double t, bool centered) {
  if (!centered) return g.charfn_phase(t);
  const auto& st = g.stats();
  if (!(st.variance > 0.0))
    throw std::domain_error("characteristic_function: centered form requires D_k > 0");
  const double s = t / std::sqrt(st.variance);
  return std::exp(std::complex<double>(0.0, -s * st.mean)) * g.charfn_phase(s);
}

McResult metropolis_run(std::shared_ptr<const Region> region, const SpinSpace& space,
                        const PairPotential& phi, const BoundaryCondition& bc,
                        double beta, const McParams& params, PairConvention conv) {
  if (params.sweeps <= params.burn_in)
    throw std::invalid_argument("metropolis_run: sweeps must exceed burnIn");
  if (params.thinning == 0) throw std::invalid_argument("metropolis_run: thinning must be >= 1");

  const std::size_t n = region->size();
  const std::size_t m = space.size();
  const PairTables tables = build_pair_tables(*region, space, phi, bc, conv);

  std::vector<int> sigma(n, 0);  // deterministic start: every site at label 0
  long long s_current = 0;
  for (std::size_t i = 0; i < n; ++i) s_current += space.f[0];

  DetRng rng(params.seed);
  std::uint64_t accepted = 0, attempts = 0;

  McResult out;
  out.params = params;

  for (std::uint64_t sweep = 0; sweep < params.sweeps; ++sweep) {
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t x = static_cast<std::size_t>(rng.next_index(n));
      const int proposal = static_cast<int>(rng.next_index(m));
      const double u = rng.next_double();
      ++attempts;
      const int old = sigma[x];
      if (proposal == old) { ++accepted; continue; }

      double dh = tables.exterior_field[x][proposal] - tables.exterior_field[x][old];
      for (int pi : tables.pairs_at_site[x]) {
        const auto& p = tables.pairs[pi];
        if (p.i == static_cast<int>(x))
          dh += p.energy[static_cast<std::size_t>(proposal) * m + sigma[p.j]] -
                p.energy[static_cast<std::size_t>(old) * m + sigma[p.j]];
        else
          dh += p.energy[static_cast<std::size_t>(sigma[p.i]) * m + proposal] -
                p.energy[static_cast<std::size_t>(sigma[p.i]) * m + old];
      }
      const double log_accept =
          std::log(space.weights[proposal] / space.weights[old]) - beta * dh;
      if (log_accept >= 0.0 || u < std::exp(log_accept)) {
        sigma[x] = proposal;
        s_current += space.f[proposal] - space.f[old];
        ++accepted;
      }
    }
    if (sweep >= params.burn_in && (sweep - params.burn_in) % params.thinning == 0)
      out.s_series.push_back(s_current);
  }

  out.acceptance_rate = attempts ? static_cast<double>(accepted) / attempts : 0.0;

  const double n_eff = static_cast<double>(out.s_series.size());
  std::map<long long, std::uint64_t> counts;
  for (long long s : out.s_series) ++counts[s];
  double mean = 0.0;
  for (long long s : out.s_series) mean += static_cast<double>(s);
  mean /= n_eff;
  double var = 0.0;
  for (long long s : out.s_series) {
    const double d = static_cast<double>(s) - mean;
    var += d * d;
  }
  out.s_mean = mean;
  out.s_variance = var / n_eff;
  for (const auto& [s, c] : counts) {
    McMassRow row;
    row.p_hat = static_cast<double>(c) / n_eff;
    row.conf_radius = 3.0 * std::sqrt(row.p_hat * (1.0 - row.p_hat) / n_eff);
    out.mass[s] = row;
  }
  return out;
}

}  // namespace clexp
