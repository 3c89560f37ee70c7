#include "clexp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clexp {

double SpinSpace::lambda_total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double SpinSpace::lambda_f() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * f[i];
  return s;
}

double SpinSpace::lambda_f2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    s += weights[i] * static_cast<double>(f[i]) * f[i];
  return s;
}

double SpinSpace::var_lambda_f() const {
  const double z = lambda_total();
  const double m = lambda_f() / z;
  return lambda_f2() / z - m * m;
}

double SpinSpace::f_norm() const {
  double m = 0.0;
  for (int v : f) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

int SpinSpace::index_of_label(const std::string& name) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("SpinSpace: unknown label '" + name + "'");
}

void SpinSpace::validate() const {
  if (labels.empty()) throw std::invalid_argument("spinSpace.labels: must be non-empty");
  if (weights.size() != labels.size())
    throw std::invalid_argument("spinSpace.weights: size must match labels");
  if (f.size() != labels.size())
    throw std::invalid_argument("spinSpace.f: size must match labels");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("spinSpace.weights: all weights must be > 0");
}

SpinSpace ising_spin_space() {
  SpinSpace s;
  s.labels = {"-", "+"};
  s.weights = {1.0, 1.0};
  s.f = {-1, 1};
  return s;
}

PairPotential PairPotential::zero() {
  PairPotential p;
  p.family_ = Family::zero;
  p.truncation_radius_ = 1;
  p.spin_values_ = {0.0};
  return p;
}

PairPotential PairPotential::long_range_ising(double J, double alpha, int truncation_radius,
                                              std::vector<double> spin_values) {
  if (!(J > 0.0)) throw std::domain_error("potential.params.J: must be > 0");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("potential.params.alpha: must be in [0,1)");
  if (truncation_radius < 1)
    throw std::domain_error("potential.truncationRadius: must be >= 1");
  if (spin_values.empty())
    throw std::invalid_argument("PairPotential: spin values must be non-empty");
  PairPotential p;
  p.family_ = Family::long_range_ising;
  p.j_ = J;
  p.alpha_ = alpha;
  p.truncation_radius_ = truncation_radius;
  p.spin_values_ = std::move(spin_values);
  for (double s : p.spin_values_) p.max_abs_spin_ = std::max(p.max_abs_spin_, std::abs(s));
  return p;
}

PairPotential PairPotential::geometric_ising(double base, int truncation_radius,
                                             std::vector<double> spin_values) {
  if (!(base > 0.0 && base < 1.0))
    throw std::domain_error("potential.params.base: must be in (0,1)");
  if (truncation_radius < 1)
    throw std::domain_error("potential.truncationRadius: must be >= 1");
  if (spin_values.empty())
    throw std::invalid_argument("PairPotential: spin values must be non-empty");
  PairPotential p;
  p.family_ = Family::geometric_ising;
  p.base_ = base;
  p.truncation_radius_ = truncation_radius;
  p.spin_values_ = std::move(spin_values);
  for (double s : p.spin_values_) p.max_abs_spin_ = std::max(p.max_abs_spin_, std::abs(s));
  return p;
}

double PairPotential::coupling_at(double r) const {
  switch (family_) {
    case Family::zero:
      return 0.0;
    case Family::long_range_ising:
      return r <= 1.0 ? j_ : std::pow(r, -2.0 + alpha_);
    case Family::geometric_ising:
      return std::pow(base_, r);
  }
  return 0.0;
}

double PairPotential::energy(std::span<const int> displacement, int a, int b) const {
  if (family_ == Family::zero) return 0.0;
  const long long n2 = squared_norm(displacement);
  if (n2 == 0) throw std::invalid_argument("PairPotential::energy: zero displacement");
  if (n2 > static_cast<long long>(truncation_radius_) * truncation_radius_) return 0.0;
  const double r = std::sqrt(static_cast<double>(n2));
  return -coupling_at(r) * spin_values_[static_cast<std::size_t>(a)] *
         spin_values_[static_cast<std::size_t>(b)];
}

double PairPotential::sup_norm(std::span<const int> displacement) const {
  if (family_ == Family::zero) return 0.0;
  const long long n2 = squared_norm(displacement);
  if (n2 == 0) return 0.0;
  if (n2 > static_cast<long long>(truncation_radius_) * truncation_radius_) return 0.0;
  const double r = std::sqrt(static_cast<double>(n2));
  return coupling_at(r) * max_abs_spin_ * max_abs_spin_;
}

bool PairPotential::has_analytic_tail(int d) const {
  return d == 1 && family_ != Family::zero;
}

double PairPotential::tail_norm_bound(int R, int d) const {
  if (family_ == Family::zero) return 0.0;
  if (d != 1) throw std::domain_error("tail_norm_bound: available for d=1 only");
  const double s2 = max_abs_spin_ * max_abs_spin_;
  if (family_ == Family::long_range_ising) {
    // integral comparison: sum_{r>R} r^(-2+alpha) <= R^(-1+alpha)/(1-alpha)
    return 2.0 * s2 * std::pow(static_cast<double>(R), -1.0 + alpha_) / (1.0 - alpha_);
  }
  // geometric series remainder
  return 2.0 * s2 * std::pow(base_, R + 1) / (1.0 - base_);
}

double coupling_J(long long distance, double J, double alpha) {
  if (distance < 1) throw std::domain_error("coupling_J: distance must be >= 1");
  if (!(J > 0.0)) throw std::domain_error("coupling_J: J must be > 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("coupling_J: alpha must be in [0,1)");
  if (distance == 1) return J;
  return std::pow(static_cast<double>(distance), -2.0 + alpha);
}

PotentialNorm potential_norm(const PairPotential& phi, int R, int d) {
  if (R < 1) throw std::domain_error("potential_norm: R must be >= 1");
  PotentialNorm out;
  for (const Site& y : displacements_within(d, R)) out.partial_sum += phi.sup_norm(y.x);
  if (phi.family() == PairPotential::Family::zero) {
    out.tail_bound = 0.0;
  } else if (phi.has_analytic_tail(d)) {
    // Tail of the untruncated family; zero beyond the truncation by
    // construction, so the analytic bound is reported for auditing.
    out.tail_bound = phi.tail_norm_bound(R, d);
  }
  return out;
}

TailConditionProbe tail_condition_probe(const PairPotential& phi, std::span<const int> radii, int d) {
  if (radii.empty()) throw std::invalid_argument("tail_condition_probe: radii must be non-empty");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw std::invalid_argument("tail_condition_probe: radii must be increasing");

  TailConditionProbe probe;
  const int rmax = std::max(radii.back(), phi.truncation_radius());
  const auto& disp = displacements_within(d, rmax);

  for (int R : radii) {
    TailConditionRow row;
    row.radius = R;
    const long long r2 = static_cast<long long>(R) * R;
    for (const Site& y : disp) {
      const long long n2 = squared_norm(y.x);
      if (n2 <= r2) row.sqrt_partial_sum += std::sqrt(phi.sup_norm(y.x));
      if (n2 >= r2) row.tail_sup = std::max(row.tail_sup, phi.sup_norm(y.x));
    }
    probe.rows.push_back(row);
  }

  // Shell-mass fit over the trailing half of the radii: slope of
  // log(increment) vs log(R), shifted by d (integral test normalization).
  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < probe.rows.size(); ++i) {
    if (i < probe.rows.size() / 2) continue;
    const double inc = probe.rows[i].sqrt_partial_sum - probe.rows[i - 1].sqrt_partial_sum;
    xs.push_back(std::log(static_cast<double>(probe.rows[i].radius)));
    ys.push_back(std::log(std::max(inc, 1e-300)));
  }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    probe.growth_exponent = (den > 0 ? num / den : 0.0) + d;
  } else {
    probe.growth_exponent = d;
  }

  probe.sqrt_series_divergent_analytic =
      phi.family() == PairPotential::Family::long_range_ising && d == 1;
  probe.sqrt_series_appears_bounded =
      probe.growth_exponent < 0.0 && !probe.sqrt_series_divergent_analytic;
  probe.tail_sup_positive = true;
  for (const auto& row : probe.rows)
    if (!(row.tail_sup > 0.0)) probe.tail_sup_positive = false;
  return probe;
}

BoundaryCondition BoundaryCondition::free() {
  BoundaryCondition b;
  b.rule_ = Rule::free;
  return b;
}

BoundaryCondition BoundaryCondition::constant(int label) {
  BoundaryCondition b;
  b.rule_ = Rule::constant;
  b.constant_label_ = label;
  return b;
}

BoundaryCondition BoundaryCondition::explicit_map(std::map<Site, int> assignment) {
  BoundaryCondition b;
  b.rule_ = Rule::explicit_map;
  b.assignment_ = std::move(assignment);
  return b;
}

BoundaryCondition BoundaryCondition::composite(std::shared_ptr<const Region> full_box,
                                               std::map<Site, int> omega_prime,
                                               BoundaryCondition outer) {
  BoundaryCondition b;
  b.rule_ = Rule::composite;
  b.full_box_ = std::move(full_box);
  b.assignment_ = std::move(omega_prime);
  b.outer_ = std::make_shared<BoundaryCondition>(std::move(outer));
  return b;
}

std::optional<int> BoundaryCondition::label_at(const Site& y) const {
  switch (rule_) {
    case Rule::free:
      return std::nullopt;
    case Rule::constant:
      return constant_label_;
    case Rule::explicit_map: {
      auto it = assignment_.find(y);
      if (it == assignment_.end())
        throw std::runtime_error("BoundaryCondition: explicit assignment missing a required site");
      return it->second;
    }
    case Rule::composite: {
      if (full_box_->contains(y)) {
        auto it = assignment_.find(y);
        if (it == assignment_.end())
          throw std::runtime_error("BoundaryCondition: composite omega' missing a required site");
        return it->second;
      }
      return outer_->label_at(y);
    }
  }
  return std::nullopt;
}

double hamiltonian(const Region& region, std::span<const int> sigma,
                   const BoundaryCondition& bc, const SpinSpace& space,
                   const PairPotential& phi, PairConvention conv) {
  if (sigma.size() != region.size())
    throw std::invalid_argument("hamiltonian: sigma must assign a label to every region site");
  for (int lbl : sigma)
    if (lbl < 0 || static_cast<std::size_t>(lbl) >= space.size())
      throw std::invalid_argument("hamiltonian: label index out of range");

  const int R = phi.truncation_radius();
  const long long r2 = static_cast<long long>(R) * R;
  const double interior_factor = conv == PairConvention::ordered ? 2.0 : 1.0;
  double e = 0.0;

  const auto& sites = region.sites();
  std::vector<int> disp(region.dim());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      for (int c = 0; c < region.dim(); ++c) disp[c] = sites[j].x[c] - sites[i].x[c];
      if (squared_norm(disp) > r2) continue;
      e += interior_factor * phi.energy(disp, sigma[i], sigma[j]);
    }
  }

  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (const Site& v : displacements_within(region.dim(), R)) {
      const Site y = sites[i].shifted(v);
      if (region.contains(y)) continue;
      const auto lbl = bc.label_at(y);
      if (!lbl) continue;
      e += phi.energy(v.x, sigma[i], *lbl);
    }
  }
  return e;
}

PairTables build_pair_tables(const Region& region, const SpinSpace& space,
                             const PairPotential& phi, const BoundaryCondition& bc,
                             PairConvention conv) {
  PairTables t;
  t.num_labels = space.size();
  const int R = phi.truncation_radius();
  const long long r2 = static_cast<long long>(R) * R;
  const double interior_factor = conv == PairConvention::ordered ? 2.0 : 1.0;
  const std::size_t n = region.size();
  const std::size_t m = space.size();

  t.pairs_at_site.resize(n);
  std::vector<int> disp(region.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int c = 0; c < region.dim(); ++c) disp[c] = region.site(j).x[c] - region.site(i).x[c];
      if (squared_norm(disp) > r2) continue;
      PairTables::PairEntry entry;
      entry.i = static_cast<int>(i);
      entry.j = static_cast<int>(j);
      entry.energy.resize(m * m);
      bool nonzero = false;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          const double v = interior_factor * phi.energy(disp, static_cast<int>(a), static_cast<int>(b));
          entry.energy[a * m + b] = v;
          if (v != 0.0) nonzero = true;
        }
      if (!nonzero) continue;
      t.pairs_at_site[i].push_back(static_cast<int>(t.pairs.size()));
      t.pairs_at_site[j].push_back(static_cast<int>(t.pairs.size()));
      t.pairs.push_back(std::move(entry));
    }
  }

  t.exterior_field.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (const Site& v : displacements_within(region.dim(), R)) {
      const Site y = region.site(i).shifted(v);
      if (region.contains(y)) continue;
      const auto lbl = bc.label_at(y);
      if (!lbl) continue;
      for (std::size_t a = 0; a < m; ++a)
        t.exterior_field[i][a] += phi.energy(v.x, static_cast<int>(a), *lbl);
    }
  }
  return t;
}

}  // namespace clexp
