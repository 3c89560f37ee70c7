#include "clexp/config.hpp"

#include <cmath>

#include <json.hpp>

namespace clexp {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + key + ": required field is missing");
  return *it;
}

double number_at(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ValidationError(path + key + ": must be a number");
  return v.get<double>();
}

SpinSpace parse_spin_space(const json& j) {
  SpinSpace space;
  const json& labels = require(j, "labels", "spinSpace.");
  const json& weights = require(j, "weights", "spinSpace.");
  const json& f = require(j, "f", "spinSpace.");
  if (!labels.is_array() || !weights.is_array() || !f.is_array())
    throw ValidationError("spinSpace: labels, weights and f must be arrays");
  space.labels = labels.get<std::vector<std::string>>();
  space.weights = weights.get<std::vector<double>>();
  space.f = f.get<std::vector<int>>();
  try {
    space.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return space;
}

PairPotential parse_potential(const json& j, const SpinSpace& space) {
  const std::string family = require(j, "family", "potential.").get<std::string>();
  const int trunc = static_cast<int>(number_at(j, "truncationRadius", "potential."));

  std::vector<double> spin_values;
  if (j.contains("spinValues")) {
    spin_values = j.at("spinValues").get<std::vector<double>>();
    if (spin_values.size() != space.size())
      throw ValidationError("potential.spinValues: size must match spinSpace.labels");
  } else {
    for (int v : space.f) spin_values.push_back(static_cast<double>(v));
  }

  try {
    if (family == "zero") return PairPotential::zero();
    const json& params = require(j, "params", "potential.");
    if (family == "long_range_ising") {
      return PairPotential::long_range_ising(number_at(params, "J", "potential.params."),
                                             number_at(params, "alpha", "potential.params."),
                                             trunc, std::move(spin_values));
    }
    if (family == "geometric_ising") {
      return PairPotential::geometric_ising(number_at(params, "base", "potential.params."), trunc,
                                            std::move(spin_values));
    }
  } catch (const std::domain_error& e) {
    throw ValidationError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("potential.family: unknown family '" + family + "'");
}

Site parse_site(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ValidationError(path + ": a site is a non-empty array of integers");
  return Site(j.get<std::vector<int>>());
}

}  // namespace

BoundaryCondition ExperimentConfig::make_boundary() const {
  if (boundary.rule == "free") return BoundaryCondition::free();
  if (boundary.rule == "constant") return BoundaryCondition::constant(boundary.constant_label);
  return BoundaryCondition::explicit_map(boundary.assignment);
}

Region ExperimentConfig::make_region() const {
  if (!explicit_sites.empty()) return Region(explicit_sites);
  if (!box) throw ValidationError("box: required when no explicit sites are given");
  return Region(*box);
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  const json& model = require(j, "model", "");
  cfg.space = parse_spin_space(require(model, "spinSpace", "model."));
  cfg.potential = parse_potential(require(model, "potential", "model."), cfg.space);
  if (model.contains("pairConvention")) {
    const std::string conv = model.at("pairConvention").get<std::string>();
    if (conv == "unordered") cfg.convention = PairConvention::unordered;
    else if (conv == "ordered") cfg.convention = PairConvention::ordered;
    else throw ValidationError("model.pairConvention: must be 'unordered' or 'ordered'");
  }

  if (j.contains("box")) {
    const json& b = j.at("box");
    const int d = static_cast<int>(number_at(b, "d", "box."));
    const int k = static_cast<int>(number_at(b, "k", "box."));
    if (d < 1) throw ValidationError("box.d: must be >= 1");
    if (k < 0) throw ValidationError("box.k: must be >= 0");
    cfg.box = Box(d, k);
  }
  if (j.contains("sites")) {
    for (std::size_t i = 0; i < j.at("sites").size(); ++i)
      cfg.explicit_sites.push_back(parse_site(j.at("sites")[i], "sites[" + std::to_string(i) + "]"));
  }
  if (j.contains("boxes")) {
    cfg.box_ks = j.at("boxes").get<std::vector<int>>();
    for (int k : cfg.box_ks)
      if (k < 0) throw ValidationError("boxes: entries must be >= 0");
  }

  if (j.contains("boundary")) {
    const json& b = j.at("boundary");
    cfg.boundary.rule = require(b, "rule", "boundary.").get<std::string>();
    if (cfg.boundary.rule == "constant") {
      const std::string label = require(b, "label", "boundary.").get<std::string>();
      try {
        cfg.boundary.constant_label = cfg.space.index_of_label(label);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("boundary.label: ") + e.what());
      }
    } else if (cfg.boundary.rule == "explicit") {
      const json& assign = require(b, "assign", "boundary.");
      for (const json& entry : assign) {
        const Site s = parse_site(require(entry, "site", "boundary.assign."), "boundary.assign.site");
        const std::string label = require(entry, "label", "boundary.assign.").get<std::string>();
        try {
          cfg.boundary.assignment[s] = cfg.space.index_of_label(label);
        } catch (const std::invalid_argument& e) {
          throw ValidationError(std::string("boundary.assign.label: ") + e.what());
        }
      }
    } else if (cfg.boundary.rule != "free") {
      throw ValidationError("boundary.rule: must be 'free', 'constant' or 'explicit'");
    }
  }

  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("betas")) cfg.betas = j.at("betas").get<std::vector<double>>();
  for (double b : cfg.betas)
    if (b < 0.0) throw ValidationError("betas: inverse temperatures must be >= 0");
  if (cfg.beta < 0.0) throw ValidationError("beta: must be >= 0");
  if (j.contains("t")) cfg.t = j.at("t").get<double>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (cfg.delta <= 0.0) throw ValidationError("delta: must be > 0");
  if (j.contains("c")) cfg.c = j.at("c").get<double>();
  if (cfg.c <= 0.0) throw ValidationError("c: must be > 0");
  if (j.contains("C")) cfg.big_c_kp = j.at("C").get<double>();
  if (cfg.big_c_kp < 0.0 || cfg.big_c_kp * M_E >= 1.0)
    throw ValidationError("C: must be in [0, 1/e)");
  if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
  if (cfg.eps <= 0.0) throw ValidationError("eps: must be > 0");
  if (j.contains("r0")) cfg.r0 = static_cast<int>(j.at("r0").get<double>());
  if (cfg.r0 < 1) throw ValidationError("r0: must be >= 1");

  if (j.contains("cutoffs")) {
    const json& c = j.at("cutoffs");
    cfg.cutoffs.max_bonds = static_cast<int>(number_at(c, "maxBonds", "cutoffs."));
    cfg.cutoffs.max_pair_range = static_cast<int>(number_at(c, "maxPairRange", "cutoffs."));
    if (c.contains("restrictToR2")) cfg.cutoffs.restrict_to_r2 = c.at("restrictToR2").get<bool>();
    if (cfg.cutoffs.max_bonds < 1) throw ValidationError("cutoffs.maxBonds: must be >= 1");
    if (cfg.cutoffs.max_pair_range < 1)
      throw ValidationError("cutoffs.maxPairRange: must be >= 1");
    if (cfg.cutoffs.max_pair_range > cfg.potential.truncation_radius())
      throw ValidationError("cutoffs.maxPairRange: must not exceed potential.truncationRadius");
  } else {
    cfg.cutoffs.max_bonds = 3;
    cfg.cutoffs.max_pair_range = std::min(3, cfg.potential.truncation_radius());
  }

  if (j.contains("mc")) {
    const json& m = j.at("mc");
    cfg.mc.sweeps = static_cast<std::uint64_t>(number_at(m, "sweeps", "mc."));
    cfg.mc.burn_in = static_cast<std::uint64_t>(number_at(m, "burnIn", "mc."));
    if (m.contains("thinning"))
      cfg.mc.thinning = static_cast<std::uint64_t>(m.at("thinning").get<double>());
    if (cfg.mc.thinning == 0) throw ValidationError("mc.thinning: must be >= 1");
    if (cfg.mc.sweeps <= cfg.mc.burn_in)
      throw ValidationError("mc.sweeps: must exceed mc.burnIn");
  }

  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.mc.seed = cfg.seed;
  if (j.contains("budgets") && j.at("budgets").contains("enumeration"))
    cfg.enumeration_budget = j.at("budgets").at("enumeration").get<std::uint64_t>();
  if (j.contains("grid") && j.at("grid").contains("points")) {
    cfg.grid_points = static_cast<int>(j.at("grid").at("points").get<double>());
    if (cfg.grid_points < 2) throw ValidationError("grid.points: must be >= 2");
  }
  if (j.contains("series")) {
    const json& s = j.at("series");
    if (s.contains("maxOrder")) {
      cfg.series_max_order = static_cast<int>(s.at("maxOrder").get<double>());
      if (cfg.series_max_order < 1 || cfg.series_max_order > 5)
        throw ValidationError("series.maxOrder: must be in 1..5");
    }
    if (s.contains("maxBonds") || s.contains("maxPairRange")) {
      PolymerCutoffs sc = cfg.cutoffs;
      if (s.contains("maxBonds")) sc.max_bonds = static_cast<int>(s.at("maxBonds").get<double>());
      if (s.contains("maxPairRange"))
        sc.max_pair_range = static_cast<int>(s.at("maxPairRange").get<double>());
      if (sc.max_bonds < 1) throw ValidationError("series.maxBonds: must be >= 1");
      if (sc.max_pair_range < 1 || sc.max_pair_range > cfg.potential.truncation_radius())
        throw ValidationError("series.maxPairRange: must be in 1..truncationRadius");
      cfg.series_cutoffs = sc;
    }
  }
  if (j.contains("integral")) {
    const json& in = j.at("integral");
    if (in.contains("B")) cfg.integral_b = in.at("B").get<double>();
    if (in.contains("delta")) cfg.integral_delta = in.at("delta").get<double>();
    if (cfg.integral_b <= 0.0) throw ValidationError("integral.B: must be > 0");
    if (cfg.integral_delta <= 0.0) throw ValidationError("integral.delta: must be > 0");
  }
  if (j.contains("charfn")) {
    const json& cf = j.at("charfn");
    if (cf.contains("regime")) {
      cfg.charfn_regime = cf.at("regime").get<std::string>();
      if (cfg.charfn_regime != "quadratic" && cfg.charfn_regime != "tail")
        throw ValidationError("charfn.regime: must be 'quadratic' or 'tail'");
    }
    if (cf.contains("constantOverride"))
      cfg.charfn_constant_override = cf.at("constantOverride").get<double>();
  }
  if (j.contains("kCutoffRadius")) cfg.k_cutoff_radius = j.at("kCutoffRadius").get<double>();
  if (j.contains("decimate") && j.at("decimate").contains("samples")) {
    cfg.decimate_samples = static_cast<int>(j.at("decimate").at("samples").get<double>());
    if (cfg.decimate_samples < 1) throw ValidationError("decimate.samples: must be >= 1");
  }
  if (j.contains("dumpPolymers")) cfg.dump_polymers = j.at("dumpPolymers").get<bool>();

  if (j.contains("tasks")) {
    cfg.tasks = j.at("tasks").get<std::vector<std::string>>();
    for (const std::string& t : cfg.tasks)
      if (t != "verify-expansion" && t != "bounds" && t != "lclt" && t != "charfn" &&
          t != "decimate" && t != "mc")
        throw ValidationError("tasks: unknown task '" + t + "'");
  }
  return cfg;
}

}  // namespace clexp
