#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clexp/geometry.hpp"

namespace clexp {

/// Finite spin space: labels with positive lambda-masses and an integer
/// observable f per label.
struct SpinSpace {
  std::vector<std::string> labels;
  std::vector<double> weights;  // lambda mass per label, all > 0
  std::vector<int> f;           // observable value per label

  std::size_t size() const { return labels.size(); }

  double lambda_total() const;  // lambda(E)
  double lambda_f() const;      // lambda(f) = sum w_i f_i
  double lambda_f2() const;     // lambda(f^2)
  /// Normalized variance of f under lambda/lambda(E). Positive iff f is
  /// non-constant on (positive-weight) labels.
  double var_lambda_f() const;
  double f_norm() const;        // max |f|

  int index_of_label(const std::string& name) const;  // throws if unknown
  void validate() const;
};

/// Two spin labels ±1 with unit weights and f(sigma) = sigma.
SpinSpace ising_spin_space();

/// Translation-invariant two-body potential. The kernel is identically zero
/// beyond the truncation radius; analytic tail bounds quantify what the
/// truncation discards (available for the 1d families).
class PairPotential {
public:
  enum class Family { zero, long_range_ising, geometric_ising };

  static PairPotential zero();
  /// Phi_{x,y}(a,b) = -J(|x-y|) s_a s_b with J(1)=J and J(r)=r^(-2+alpha).
  static PairPotential long_range_ising(double J, double alpha, int truncation_radius,
                                        std::vector<double> spin_values);
  /// Phi_{x,y}(a,b) = -base^|x-y| s_a s_b with 0 < base < 1.
  static PairPotential geometric_ising(double base, int truncation_radius,
                                       std::vector<double> spin_values);

  Family family() const { return family_; }
  int truncation_radius() const { return truncation_radius_; }
  double param_J() const { return j_; }
  double param_alpha() const { return alpha_; }
  double param_base() const { return base_; }
  std::size_t num_labels() const { return spin_values_.size(); }

  /// Energy of the pair (x, x+displacement) with labels (a, b).
  /// Zero when the displacement is outside the truncation radius.
  double energy(std::span<const int> displacement, int a, int b) const;

  /// Sup over label pairs of |energy| at this displacement.
  double sup_norm(std::span<const int> displacement) const;

  /// Coupling magnitude at integer distance r >= 1 (before spin factors),
  /// without the truncation gate.
  double coupling_at(double r) const;

  bool has_analytic_tail(int d) const;
  /// Upper bound on sum_{||y|| > R} sup_norm(y) for the untruncated family
  /// (d = 1 families only).
  double tail_norm_bound(int R, int d) const;

private:
  Family family_ = Family::zero;
  double j_ = 0.0;
  double alpha_ = 0.0;
  double base_ = 0.0;
  int truncation_radius_ = 1;
  std::vector<double> spin_values_;
  double max_abs_spin_ = 0.0;
};

/// Long-range Ising coupling J(r): J at r=1, r^(-2+alpha) otherwise.
double coupling_J(long long distance, double J, double alpha);

struct PotentialNorm {
  double partial_sum = 0.0;              // sum over 0 < ||y|| <= R of sup_norm
  std::optional<double> tail_bound;      // analytic remainder past R, if available
};
PotentialNorm potential_norm(const PairPotential& phi, int R, int d);

struct TailConditionRow {
  int radius = 0;
  double sqrt_partial_sum = 0.0;  // sum over 0 < ||x|| <= R of sup_norm^(1/2)
  double tail_sup = 0.0;          // max over R <= ||x|| <= truncation of sup_norm
};
struct TailConditionProbe {
  std::vector<TailConditionRow> rows;
  /// Least-squares slope of log(shell mass) vs log(R) over the trailing
  /// half of the radii, plus d. Negative values indicate a summable tail
  /// by the integral test.
  double growth_exponent = 0.0;
  bool sqrt_series_appears_bounded = false;
  bool sqrt_series_divergent_analytic = false;  // long-range Ising in d=1
  bool tail_sup_positive = false;               // all probed tail sups > 0
};
TailConditionProbe tail_condition_probe(const PairPotential& phi, std::span<const int> radii, int d);

/// Boundary condition: a deterministic rule assigning labels to exterior
/// sites, evaluated lazily. label_at returns nullopt when the rule drops
/// the exterior term (free), and throws if the rule is defined but has no
/// value at a required site.
class BoundaryCondition {
public:
  enum class Rule { free, constant, explicit_map, composite };

  static BoundaryCondition free();
  static BoundaryCondition constant(int label);
  static BoundaryCondition explicit_map(std::map<Site, int> assignment);
  /// Decimated composite (omega ∨ omega')^{r0}: sites inside full_box use
  /// omega_prime, sites outside full_box use the outer rule.
  static BoundaryCondition composite(std::shared_ptr<const Region> full_box,
                                     std::map<Site, int> omega_prime,
                                     BoundaryCondition outer);

  Rule rule() const { return rule_; }
  std::optional<int> label_at(const Site& y) const;

private:
  Rule rule_ = Rule::free;
  int constant_label_ = 0;
  std::map<Site, int> assignment_;
  std::shared_ptr<const Region> full_box_;
  std::shared_ptr<const BoundaryCondition> outer_;
};

/// Pair-counting convention. The canonical internal form counts each
/// unordered pair once; the ordered convention doubles interior pair terms
/// (a beta rescaling of the interaction part).
enum class PairConvention { unordered, ordered };

/// H_Lambda^omega(sigma): interior pair terms within the truncation radius
/// plus boundary terms against bc. sigma maps region site index -> label.
double hamiltonian(const Region& region, std::span<const int> sigma,
                   const BoundaryCondition& bc, const SpinSpace& space,
                   const PairPotential& phi,
                   PairConvention conv = PairConvention::unordered);

/// Shared precomputation for exact enumeration, Monte Carlo and activities.
struct PairTables {
  struct PairEntry {
    int i = 0, j = 0;                // region site indices, i < j
    std::vector<double> energy;      // |E| x |E| row-major, convention applied
  };
  std::vector<PairEntry> pairs;
  std::vector<std::vector<int>> pairs_at_site;      // site -> indices into `pairs`
  std::vector<std::vector<double>> exterior_field;  // site -> h_x(e) per label
  std::size_t num_labels = 0;

  double pair_energy(std::size_t pair_index, int a, int b) const {
    return pairs[pair_index].energy[static_cast<std::size_t>(a) * num_labels + b];
  }
};
PairTables build_pair_tables(const Region& region, const SpinSpace& space,
                             const PairPotential& phi, const BoundaryCondition& bc,
                             PairConvention conv = PairConvention::unordered);

}  // namespace clexp
