#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clexp/gibbs.hpp"
#include "clexp/model.hpp"
#include "clexp/polymer.hpp"

namespace clexp {

/// Schema violation; the message carries the offending field path.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct BoundarySpec {
  std::string rule = "free";               // free | constant | explicit
  int constant_label = 0;
  std::map<Site, int> assignment;
};

struct ExperimentConfig {
  SpinSpace space;
  PairPotential potential = PairPotential::zero();
  PairConvention convention = PairConvention::unordered;

  std::optional<Box> box;
  std::vector<Site> explicit_sites;        // overrides box when non-empty
  std::vector<int> box_ks;                 // k sweep for the lclt task

  BoundarySpec boundary;

  double beta = 0.0;
  std::vector<double> betas;               // grid for the bounds task
  double t = 0.0;
  double delta = 0.05;
  double c = 0.1;
  double big_c_kp = 0.1;                   // "C" of the pinned bound
  double eps = 0.5;
  int r0 = 2;

  PolymerCutoffs cutoffs;
  McParams mc;
  std::uint64_t seed = 1;
  std::uint64_t enumeration_budget = ExactGibbs::kDefaultBudget;
  int grid_points = 2048;
  int series_max_order = 4;
  std::optional<PolymerCutoffs> series_cutoffs;  // default: the global cutoffs
  double integral_b = 1.0;
  double integral_delta = 0.8;
  std::string charfn_regime = "quadratic";  // quadratic | tail
  std::optional<double> charfn_constant_override;
  double k_cutoff_radius = 400.0;
  int decimate_samples = 20;
  bool dump_polymers = false;

  std::vector<std::string> tasks;

  BoundaryCondition make_boundary() const;
  /// Region from explicit sites when given, else from the box.
  Region make_region() const;
};

/// Parses and validates a configuration document. Throws ValidationError
/// naming the offending field path.
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace clexp
