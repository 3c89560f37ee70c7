#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "clexp/common.hpp"
#include "clexp/gibbs.hpp"
#include "clexp/model.hpp"

namespace clexp {

/// A bond: one site or an unordered pair of distinct sites, stored as
/// region site indices with lo <= hi (lo == hi encodes a singleton).
struct Bond {
  int lo = 0;
  int hi = 0;

  Bond() = default;
  Bond(int a, int b) : lo(a < b ? a : b), hi(a < b ? b : a) {}
  bool singleton() const { return lo == hi; }
  bool touches(int site) const { return lo == site || hi == site; }
  bool intersects(const Bond& o) const {
    return touches(o.lo) || touches(o.hi);
  }
  auto operator<=>(const Bond&) const = default;
};

/// Connected set of bonds with its support. gamma1/gamma2 split the bonds
/// by cardinality.
struct Polymer {
  std::vector<Bond> bonds;     // sorted
  std::vector<int> support;    // sorted region site indices
  std::uint64_t support_mask = 0;

  std::size_t singleton_count() const;
  std::vector<Bond> gamma1() const;
  std::vector<Bond> gamma2() const;
  bool in_r2() const { return singleton_count() == 0; }
  bool empty() const { return bonds.empty(); }
};

/// Builds a polymer from bonds, validating connectivity. region_size caps
/// the support mask (must be <= 64 sites).
Polymer make_polymer(std::vector<Bond> bonds, std::size_t region_size);

/// Empty polymer, valid only as the argument of zeta_hat (= 1).
Polymer empty_polymer();

/// True iff every two bonds are linked by a chain of pairwise-intersecting
/// bonds. Throws on an empty set.
bool is_connected(std::span<const Bond> bonds);

struct PolymerCutoffs {
  int max_bonds = 1;
  int max_pair_range = 1;
  bool restrict_to_r2 = false;
  std::uint64_t max_polymers = 1ull << 22;  // enumeration budget
};

/// Canonical ordering of the emitted stream: by minimal support site, then
/// bond count, then lexicographic bond list.
bool polymer_canonical_less(const Polymer& a, const Polymer& b);

/// Enumerates every connected bond set inside the region within the
/// cutoffs, each exactly once, in canonical order.
std::vector<Polymer> enumerate_polymers(const Region& region, const PairPotential& phi,
                                        const PolymerCutoffs& cutoffs);

enum class ActivityKind { zeta_t, zeta_hat, eta_c, zeta_tilde };

/// Everything activities need: the single-site densities p_x^w, pair xi
/// tables and the phase t/sqrt(D_k). Immutable after construction.
class ActivityContext {
public:
  static ActivityContext make(std::shared_ptr<const Region> region, SpinSpace space,
                              PairPotential phi, BoundaryCondition bc, double beta,
                              double t = 0.0, double d_k = 0.0,
                              PairConvention conv = PairConvention::unordered);

  const Region& region() const { return *region_; }
  std::shared_ptr<const Region> region_ptr() const { return region_; }
  const SpinSpace& space() const { return space_; }
  const PairPotential& potential() const { return phi_; }
  const BoundaryCondition& boundary() const { return bc_; }
  double beta() const { return beta_; }
  double t() const { return t_; }
  double d_k() const { return d_k_; }
  double phase() const { return phase_; }  // t / sqrt(D_k), 0 when t = 0
  PairConvention convention() const { return conv_; }

  /// Normalized single-site mass: p_x^w(e) * lambda(e) / N_x.
  const std::vector<double>& site_mass(std::size_t site) const { return site_mass_[site]; }
  /// N_x = integral of exp(-beta h_x) dlambda.
  double site_normalizer(std::size_t site) const { return site_normalizer_[site]; }

  /// xi_{beta,{x}}(e) = exp(i phase f(e)) - 1.
  std::complex<double> xi_single(int label) const { return xi_single_[label]; }
  /// exp(i phase f(e)), used by zeta_tilde.
  std::complex<double> phase_factor(int label) const { return phase_factor_[label]; }
  /// xi_{beta,{x,y}}(a,b) = exp(-beta Phi) - 1 for a region pair (i,j).
  double xi_pair(int i, int j, int a, int b) const;
  bool pair_in_range(int i, int j) const { return pair_index(i, j) >= 0; }

  std::size_t num_labels() const { return space_.size(); }

private:
  int pair_index(int i, int j) const;

  std::shared_ptr<const Region> region_;
  SpinSpace space_;
  PairPotential phi_;
  BoundaryCondition bc_;
  double beta_ = 0.0, t_ = 0.0, d_k_ = 0.0, phase_ = 0.0;
  PairConvention conv_ = PairConvention::unordered;
  std::vector<std::vector<double>> site_mass_;
  std::vector<double> site_normalizer_;
  std::vector<std::complex<double>> xi_single_;
  std::vector<std::complex<double>> phase_factor_;
  std::vector<std::vector<double>> xi_pair_;   // per in-range pair, |E|x|E|
  std::vector<int> pair_lookup_;               // n*n -> pair table index or -1
};

/// p_x^w as a probability mass over labels (density times lambda-mass,
/// normalized).
std::vector<double> single_site_density(const ActivityContext& ctx, std::size_t site_index);

constexpr std::uint64_t kActivityBudget = 1ull << 20;

/// Direct nested summation of the defining integral over E^{support}.
/// eta_c needs the constant c; zeta_hat accepts the empty polymer (= 1).
std::complex<double> activity(const ActivityContext& ctx, const Polymer& r, ActivityKind kind,
                              double c = 0.0, std::uint64_t budget = kActivityBudget);

}  // namespace clexp
