#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "clexp/common.hpp"
#include "clexp/model.hpp"

namespace clexp {

/// Exact S_k statistics: mean, variance D_k and the full mass function on
/// the lattice {|Lambda| a + b h}.
struct SkStatistics {
  double mean = 0.0;
  double variance = 0.0;                  // D_k
  std::map<long long, double> mass;       // S value -> probability
};

/// Fully enumerated finite-volume Gibbs distribution. Immutable after
/// construction; safe to share across workers.
class ExactGibbs {
public:
  static constexpr std::uint64_t kDefaultBudget = 1ull << 24;

  /// Enumerates all |E|^|Lambda| configurations in mixed-radix order over
  /// the lexicographically sorted site list (site 0 is the fastest digit).
  /// Refuses with BudgetError when the state count exceeds the budget.
  static ExactGibbs build(std::shared_ptr<const Region> region, SpinSpace space,
                          PairPotential phi, BoundaryCondition bc, double beta,
                          PairConvention conv = PairConvention::unordered,
                          std::uint64_t budget = kDefaultBudget);

  const Region& region() const { return *region_; }
  std::shared_ptr<const Region> region_ptr() const { return region_; }
  const SpinSpace& space() const { return space_; }
  const PairPotential& potential() const { return phi_; }
  const BoundaryCondition& boundary() const { return bc_; }
  double beta() const { return beta_; }
  PairConvention convention() const { return conv_; }

  std::uint64_t config_count() const { return static_cast<std::uint64_t>(log_weights_.size()); }
  double log_weight(std::uint64_t n) const { return log_weights_[n]; }
  double log_z() const { return log_z_; }
  double z() const { return std::exp(log_z_); }
  double probability(std::uint64_t n) const { return std::exp(log_weights_[n] - log_z_); }

  int label_of(std::uint64_t config, std::size_t site_index) const;
  long long s_value(std::uint64_t config) const;  // S_k = sum_x f(sigma_x)

  const SkStatistics& stats() const { return stats_; }

  /// mu(exp(i s S_k)) for a raw phase s.
  std::complex<double> charfn_phase(double s) const;
  /// Complex partition function Z_{Lambda,beta,t} with S-phase s = t/sqrt(D_k).
  std::complex<double> z_t_phase(double s) const;

private:
  std::shared_ptr<const Region> region_;
  SpinSpace space_;
  PairPotential phi_;
  BoundaryCondition bc_;
  double beta_ = 0.0;
  PairConvention conv_ = PairConvention::unordered;
  std::vector<double> log_weights_;
  double log_z_ = 0.0;
  SkStatistics stats_;
};

SkStatistics sk_statistics(const ExactGibbs& g);

/// mu(exp(it S_k)) or, when centered, mu(exp(it (S_k - mean)/sqrt(D_k))).
std::complex<double> characteristic_function(const ExactGibbs& g, double t, bool centered);

struct McParams {
  std::uint64_t seed = 1;
  std::uint64_t sweeps = 0;       // total sweeps, including burn-in
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;     // record every `thinning` sweeps after burn-in
};

struct McMassRow {
  double p_hat = 0.0;
  double conf_radius = 0.0;  // 3 * sqrt(p(1-p)/n_eff)
};

struct McResult {
  McParams params;
  double acceptance_rate = 0.0;
  std::vector<long long> s_series;          // thinned post burn-in S_k values
  std::map<long long, McMassRow> mass;      // estimated mass function
  double s_mean = 0.0;
  double s_variance = 0.0;
};

/// Single-site Metropolis with proposals uniform over labels and acceptance
/// min(1, (lambda_new/lambda_old) exp(-beta dH)). Deterministic under a
/// fixed seed.
McResult metropolis_run(std::shared_ptr<const Region> region, const SpinSpace& space,
                        const PairPotential& phi, const BoundaryCondition& bc,
                        double beta, const McParams& params,
                        PairConvention conv = PairConvention::unordered);

}  // namespace clexp
