#include "clexp/cli_run.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include <json.hpp>

#include "clexp/bounds.hpp"
#include "clexp/cluster.hpp"
#include "clexp/lclt.hpp"
#include "clexp/report.hpp"

namespace clexp {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json complex_json(const std::complex<double>& z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

struct TaskContext {
  const ExperimentConfig& cfg;
  std::filesystem::path out;
  int threads = 1;
  json* manifest_files;
  int worst_exit = kExitOk;

  void emit(const std::string& name, const std::string& bytes) {
    const std::uint64_t digest = write_file(out / name, bytes);
    manifest_files->push_back(json{{"path", name}, {"digest", hex64(digest)}});
  }
  void note_violation() { worst_exit = std::max(worst_exit, kExitViolation); }
};

// ---------------------------------------------------------------- bounds

json run_bounds_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  const Region box = cfg.make_region();
  const int d = box.dim();
  const int trunc = cfg.potential.truncation_radius();

  json report;
  report["delta"] = cfg.delta;
  report["c"] = cfg.c;
  report["C"] = cfg.big_c_kp;
  report["r0"] = cfg.r0;
  report["beta"] = cfg.beta;
  report["truncationRadius"] = trunc;
  report["pairConvention"] =
      cfg.convention == PairConvention::unordered ? "unordered" : "ordered";

  const PotentialNorm norm = potential_norm(cfg.potential, trunc, d);
  report["normPhi"] = {{"partialSum", norm.partial_sum},
                       {"tailBound", norm.tail_bound ? json(*norm.tail_bound) : json()}};

  const SeriesConstants sc = series_constants(cfg.delta, cfg.space.f_norm());
  report["seriesConstants"] = {{"A", sc.a_delta}, {"B", sc.b_delta}};

  if (cfg.big_c_kp > 0.0) {
    const BetaCResult bcr = beta_c_solve(cfg.big_c_kp, cfg.potential, cfg.space, trunc, d);
    report["betaC"] = {{"value", bcr.infinite ? json() : json(bcr.beta_c)},
                       {"infinite", bcr.infinite},
                       {"residual", bcr.residual}};
  }

  std::vector<BoundaryCondition> bc_samples{BoundaryCondition::free()};
  for (std::size_t e = 0; e < cfg.space.size(); ++e)
    bc_samples.push_back(BoundaryCondition::constant(static_cast<int>(e)));
  const PropConstants pc = prop_constants(cfg.space, cfg.potential, cfg.beta, cfg.eps, cfg.delta,
                                          box, bc_samples, std::nullopt, cfg.grid_points);
  report["propConstants"] = {{"dBeta", pc.d_beta},          {"gnedenkoDx", pc.gnedenko_dx},
                             {"cB", pc.c_b},                {"cC", pc.c_c},
                             {"c0Nu", pc.c0_nu},            {"epsC", pc.eps_c},
                             {"betaPrimeDelta", pc.beta_prime_delta},
                             {"gridsConverged", pc.grids_converged}};

  const LemmaConstants lc = lemma_constants(cfg.delta, cfg.beta, cfg.c, cfg.r0, cfg.space,
                                            cfg.potential, d, cfg.k_cutoff_radius);
  report["lemmaConstants"] = {
      {"dBeta", lc.d_beta},           {"aBeta4Delta", lc.a_beta_4d},
      {"D", lc.big_d},                {"dPositive", lc.d_positive},
      {"C", lc.big_c},                {"cPositive", lc.c_positive},
      {"phiBarR0", lc.phi_bar_r0},    {"K", lc.big_k},
      {"z0Decim", lc.z0_decim},       {"phiCam", lc.phi_cam},
      {"dCam", lc.d_cam},             {"dCamPositive", lc.d_cam_positive},
      {"z0Cam", lc.z0_cam},           {"z1Cam", lc.z1_cam},
      {"cCam", lc.c_cam},             {"cCamPositive", lc.c_cam_positive},
      {"decimPrereqsOk", lc.decim_prereqs_ok},
      {"camPrereqsOk", lc.cam_prereqs_ok}};

  // beta grid of the monotone constants
  CsvWriter grid({"beta", "aBeta", "alphaDeltaBeta", "alphaBeta", "alphaBarCBeta", "dBeta"});
  json grid_rows = json::array();
  const std::vector<double> betas = cfg.betas.empty() ? std::vector<double>{cfg.beta} : cfg.betas;
  for (double beta : betas) {
    const double ab = a_beta(cfg.big_c_kp, beta, cfg.potential, cfg.space, trunc, d);
    const AlphaConstants ac =
        alpha_constants(cfg.delta, beta, cfg.c, cfg.potential, cfg.space, trunc, d);
    const double db = std::exp(-2.0 * beta * (norm.partial_sum + norm.tail_bound.value_or(0.0))) *
                      cfg.space.lambda_f2() / cfg.space.lambda_total();
    grid.add_row({beta, ab, ac.alpha_delta_beta, ac.alpha_beta, ac.alpha_bar_c_beta, db});
    grid_rows.push_back(json{{"beta", beta},
                             {"aBeta", ab},
                             {"alphaDeltaBeta", ac.alpha_delta_beta},
                             {"alphaBeta", ac.alpha_beta},
                             {"alphaBarCBeta", ac.alpha_bar_c_beta},
                             {"dBeta", db}});
  }
  report["grid"] = grid_rows;

  tc.emit("constants_grid.csv", grid.str());
  tc.emit("constants_report.json", report.dump(2) + "\n");
  return json{{"name", "bounds"}, {"status", "ok"}};
}

// ------------------------------------------------------- verify-expansion

json run_verify_expansion_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  auto region = std::make_shared<const Region>(cfg.make_region());
  const BoundaryCondition bc = cfg.make_boundary();

  CsvWriter fact_csv({"volume", "beta", "t", "relError", "polymerCount", "xi_re", "xi_im"});
  json fact_rows = json::array();

  std::vector<double> ts{0.0};
  if (cfg.t != 0.0) ts.push_back(cfg.t);

  const ExactGibbs g = ExactGibbs::build(region, cfg.space, cfg.potential, bc, cfg.beta,
                                         cfg.convention, cfg.enumeration_budget);
  const double d_k = g.stats().variance;

  for (double t : ts) {
    auto ctx = ActivityContext::make(region, cfg.space, cfg.potential, bc, cfg.beta, t, d_k,
                                     cfg.convention);
    const FactorizationReport rep = factorization_check(ctx, cfg.enumeration_budget);
    fact_csv.add_row({static_cast<long long>(region->size()), cfg.beta, t, rep.rel_error,
                      static_cast<unsigned long long>(rep.polymer_count), rep.xi.real(),
                      rep.xi.imag()});
    fact_rows.push_back(json{{"volume", region->size()},
                             {"beta", cfg.beta},
                             {"t", t},
                             {"relError", rep.rel_error},
                             {"polymerCount", rep.polymer_count},
                             {"lhs", complex_json(rep.lhs)},
                             {"rhs", complex_json(rep.rhs)},
                             {"xi", complex_json(rep.xi)},
                             {"productFactor", rep.product_factor}});
  }

  // truncated cluster series against brute-force log Xi at t = 0
  auto ctx0 = ActivityContext::make(region, cfg.space, cfg.potential, bc, cfg.beta, 0.0, d_k,
                                    cfg.convention);
  SeriesOptions opt;
  opt.max_order = cfg.series_max_order;
  const PolymerCutoffs series_cut = cfg.series_cutoffs.value_or(cfg.cutoffs);
  const auto rows = truncated_log_series(ctx0, series_cut, ActivityKind::zeta_t, opt);
  const XiResult xi0 = polymer_partition_function(ctx0, series_cut, ActivityKind::zeta_t);
  const double log_xi = std::log(std::abs(xi0.xi));

  CsvWriter series_csv(
      {"n", "termCount", "increment_re", "increment_im", "partialSum_re", "partialSum_im"});
  json series_rows = json::array();
  for (const auto& row : rows) {
    series_csv.add_row({static_cast<long long>(row.n),
                        static_cast<unsigned long long>(row.term_count), row.increment.real(),
                        row.increment.imag(), row.partial_sum.real(), row.partial_sum.imag()});
    series_rows.push_back(json{{"n", row.n},
                               {"termCount", row.term_count},
                               {"increment", complex_json(row.increment)},
                               {"partialSum", complex_json(row.partial_sum)},
                               {"absErrorVsLogXi", std::abs(row.partial_sum.real() - log_xi)}});
  }

  json report;
  report["pairConvention"] =
      cfg.convention == PairConvention::unordered ? "unordered" : "ordered";
  report["factorization"] = fact_rows;
  report["series"] = series_rows;
  report["logXiBruteForce"] = log_xi;
  report["cutoffs"] = {{"maxBonds", cfg.cutoffs.max_bonds},
                       {"maxPairRange", cfg.cutoffs.max_pair_range},
                       {"restrictToR2", cfg.cutoffs.restrict_to_r2},
                       {"note", "truncated sums are lower bounds of the untruncated series"}};

  if (cfg.dump_polymers) {
    json polys = json::array();
    const auto family = enumerate_polymers(*region, cfg.potential, cfg.cutoffs);
    for (const Polymer& p : family) {
      json bonds = json::array();
      for (const Bond& b : p.bonds) {
        json sites = json::array();
        sites.push_back(region->site(b.lo).x);
        if (!b.singleton()) sites.push_back(region->site(b.hi).x);
        bonds.push_back(sites);
      }
      json entry{{"bonds", bonds}};
      entry["zetaT"] = complex_json(activity(ctx0, p, ActivityKind::zeta_t));
      if (p.in_r2()) {
        entry["zetaHat"] = activity(ctx0, p, ActivityKind::zeta_hat).real();
        entry["etaC"] = activity(ctx0, p, ActivityKind::eta_c, cfg.c).real();
        entry["zetaTilde"] = complex_json(activity(ctx0, p, ActivityKind::zeta_tilde));
      }
      polys.push_back(std::move(entry));
    }
    tc.emit("polymers.json", polys.dump(2) + "\n");
  }

  tc.emit("expansion_factorization.csv", fact_csv.str());
  tc.emit("expansion_series.csv", series_csv.str());
  tc.emit("expansion_report.json", report.dump(2) + "\n");
  return json{{"name", "verify-expansion"}, {"status", "ok"}};
}

// ------------------------------------------------------------------ lclt

json run_lclt_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  if (!cfg.box && cfg.box_ks.empty())
    throw ValidationError("boxes: the lclt task needs box or boxes");
  const int d = cfg.box ? cfg.box->d : 1;
  std::vector<int> ks = cfg.box_ks;
  if (ks.empty()) ks.push_back(cfg.box->k);

  const SpanInfo span = detect_span(cfg.space);
  const BoundaryCondition bc = cfg.make_boundary();

  struct PerK {
    int k;
    long long volume;
    LcltTable table;
    double ks_distance;
    double dk;
    IntegralDecomposition dec;
    bool dec_ok = false;
    std::string dec_error;
    bool exact = true;
  };
  std::vector<PerK> results(ks.size());

  parallel_for(ks.size(), tc.threads, [&](std::size_t i) {
    PerK& r = results[i];
    r.k = ks[i];
    auto region = std::make_shared<const Region>(Box(d, ks[i]));
    r.volume = static_cast<long long>(region->size());

    double states = 1.0;
    for (std::size_t s = 0; s < region->size(); ++s)
      states *= static_cast<double>(cfg.space.size());
    if (states > static_cast<double>(cfg.enumeration_budget)) {
      // MC extension beyond the enumeration budget: rows carry propagated
      // confidence radii and are marked as such.
      if (cfg.mc.sweeps == 0)
        throw ValidationError("mc.sweeps: k=" + std::to_string(r.k) +
                              " exceeds the enumeration budget and no mc block is configured");
      McParams params = cfg.mc;
      params.seed = DetRng(cfg.seed).derive(static_cast<std::uint64_t>(r.k));
      const McResult mc =
          metropolis_run(region, cfg.space, cfg.potential, bc, cfg.beta, params, cfg.convention);
      r.exact = false;
      r.dk = mc.s_variance;
      r.table = lclt_discrepancy_mc(mc, span, r.volume);
      SkStatistics approx;
      approx.mean = mc.s_mean;
      approx.variance = mc.s_variance;
      for (const auto& [s, row] : mc.mass) approx.mass[s] = row.p_hat;
      r.ks_distance = kolmogorov_distance_to_normal(approx);
      r.dec_error = "exact enumeration over budget; integral decomposition skipped";
      return;
    }

    const ExactGibbs g = ExactGibbs::build(region, cfg.space, cfg.potential, bc, cfg.beta,
                                           cfg.convention, cfg.enumeration_budget);
    r.dk = g.stats().variance;
    r.table = lclt_discrepancy(g.stats(), span, r.volume);
    r.ks_distance = kolmogorov_distance_to_normal(g.stats());
    try {
      r.dec = integral_decomposition(g, span, cfg.integral_b, cfg.integral_delta,
                                     cfg.grid_points);
      r.dec_ok = true;
    } catch (const std::domain_error& e) {
      r.dec_error = e.what();
    }
  });

  CsvWriter lclt_csv({"k", "volume", "dK", "supDiscrepancy", "argmaxB", "method"});
  CsvWriter iclt_csv({"k", "volume", "dkPerSite", "ksDistance"});
  CsvWriter dec_csv({"k", "B", "delta", "i1", "i2", "i3", "i4", "majorant", "supTimes2Pi",
                     "majorizes", "gridsConverged"});
  json lclt_rows = json::array(), iclt_rows = json::array(), dec_rows = json::array();
  for (const PerK& r : results) {
    double sup_radius = 0.0;
    for (const auto& row : r.table.rows)
      if (row.b == r.table.argmax_b) sup_radius = row.conf_radius;
    lclt_csv.add_row({static_cast<long long>(r.k), r.volume, r.dk, r.table.sup_discrepancy,
                      r.table.argmax_b, std::string(r.exact ? "exact" : "mc")});
    lclt_rows.push_back(json{{"k", r.k},
                             {"volume", r.volume},
                             {"dK", r.dk},
                             {"supDiscrepancy", r.table.sup_discrepancy},
                             {"supConfRadius", sup_radius},
                             {"argmaxB", r.table.argmax_b},
                             {"method", r.exact ? "exact" : "mc"}});
    iclt_csv.add_row({static_cast<long long>(r.k), r.volume,
                      r.dk / static_cast<double>(r.volume), r.ks_distance});
    iclt_rows.push_back(json{{"k", r.k},
                             {"volume", r.volume},
                             {"dkPerSite", r.dk / static_cast<double>(r.volume)},
                             {"ksDistance", r.ks_distance}});
    if (r.dec_ok) {
      const double lhs = 2.0 * M_PI * r.table.sup_discrepancy;
      const double rhs = r.dec.i1 + r.dec.i2 + r.dec.i3 + r.dec.i4;
      dec_csv.add_row({static_cast<long long>(r.k), cfg.integral_b, cfg.integral_delta, r.dec.i1,
                       r.dec.i2, r.dec.i3, r.dec.i4, r.dec.majorant, lhs, lhs <= rhs + 1e-6,
                       r.dec.grids_converged});
      dec_rows.push_back(json{{"k", r.k},
                              {"B", cfg.integral_b},
                              {"delta", cfg.integral_delta},
                              {"i1", r.dec.i1},
                              {"i2", r.dec.i2},
                              {"i3", r.dec.i3},
                              {"i4", r.dec.i4},
                              {"majorant", r.dec.majorant},
                              {"supTimes2Pi", lhs},
                              {"majorizes", lhs <= rhs + 1e-6},
                              {"gridsConverged", r.dec.grids_converged}});
    } else {
      dec_rows.push_back(json{{"k", r.k}, {"error", r.dec_error}});
    }
  }

  json report;
  report["lclt"] = lclt_rows;
  report["iclt"] = iclt_rows;
  report["integral"] = dec_rows;
  tc.emit("lclt_table.csv", lclt_csv.str());
  tc.emit("iclt_table.csv", iclt_csv.str());
  tc.emit("integral_decomposition.csv", dec_csv.str());
  tc.emit("lclt_report.json", report.dump(2) + "\n");
  return json{{"name", "lclt"}, {"status", "ok"}};
}

// ---------------------------------------------------------------- charfn

json run_charfn_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  auto region = std::make_shared<const Region>(cfg.make_region());
  const int d = region->dim();
  const BoundaryCondition bc = cfg.make_boundary();
  const SpanInfo span = detect_span(cfg.space);

  double constant = 0.0;
  bool positive = false;
  std::string source;
  if (cfg.charfn_constant_override) {
    constant = *cfg.charfn_constant_override;
    positive = constant > 0.0;
    source = "override";
  } else {
    const LemmaConstants lc = lemma_constants(cfg.delta, cfg.beta, cfg.c, cfg.r0, cfg.space,
                                              cfg.potential, d, cfg.k_cutoff_radius);
    if (cfg.charfn_regime == "quadratic") {
      constant = lc.big_d;
      positive = lc.d_positive;
      source = "lemmaConstants.D";
    } else {
      constant = lc.big_c;
      positive = lc.c_positive;
      source = "lemmaConstants.C";
    }
  }
  if (!positive)
    throw ValidationError("charfn: the bound constant " + source +
                          " is not positive at these parameters; see constants_report.json");

  const ExactGibbs g = ExactGibbs::build(region, cfg.space, cfg.potential, bc, cfg.beta,
                                         cfg.convention, cfg.enumeration_budget);
  const CharfnBoundReport rep = charfn_bound_check(
      g,
      cfg.charfn_regime == "quadratic" ? CharfnRegime::quadratic : CharfnRegime::tail, constant,
      cfg.delta, span, cfg.grid_points);

  CsvWriter grid({"t", "modulus", "bound", "holds"});
  CsvWriter values({"t", "re", "im", "modulus"});
  json rows = json::array();
  for (const auto& row : rep.rows) {
    grid.add_row({row.t, row.modulus, row.bound, row.holds});
    const std::complex<double> mu = characteristic_function(g, row.t, true);
    values.add_row({row.t, mu.real(), mu.imag(), std::abs(mu)});
    rows.push_back(json{
        {"t", row.t}, {"modulus", row.modulus}, {"bound", row.bound}, {"holds", row.holds}});
  }
  CsvWriter mass_csv({"s", "p"});
  for (const auto& [s, p] : g.stats().mass) mass_csv.add_row({s, p});
  json report;
  report["regime"] = cfg.charfn_regime;
  report["constant"] = constant;
  report["constantSource"] = source;
  report["allHold"] = rep.all_hold;
  report["worstMargin"] = rep.worst_margin;
  report["tWorst"] = rep.t_worst;
  report["rows"] = rows;

  tc.emit("charfn_grid.csv", grid.str());
  tc.emit("charfn_values.csv", values.str());
  tc.emit("mass_function.csv", mass_csv.str());
  tc.emit("charfn_report.json", report.dump(2) + "\n");

  if (!rep.all_hold) {
    tc.note_violation();
    return json{{"name", "charfn"}, {"status", "violation"}};
  }
  return json{{"name", "charfn"}, {"status", "ok"}};
}

// -------------------------------------------------------------- decimate

json run_decimate_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  auto region = std::make_shared<const Region>(cfg.make_region());
  const int d = region->dim();
  const BoundaryCondition bc = cfg.make_boundary();

  const DecimationReport rep =
      decimation_experiment(region, cfg.space, cfg.potential, bc, cfg.beta, cfg.r0,
                            cfg.decimate_samples, cfg.seed, cfg.t, cfg.convention,
                            cfg.enumeration_budget);
  const LemmaConstants lc = lemma_constants(cfg.delta, cfg.beta, cfg.c, cfg.r0, cfg.space,
                                            cfg.potential, d, cfg.k_cutoff_radius);

  const double sub_volume = static_cast<double>(rep.sublattice->size());
  const double bound = lc.c_cam_positive ? std::exp(-lc.c_cam * sub_volume) : 1.0;
  const bool violated = lc.c_cam_positive && rep.sup_modulus > bound + 1e-12;

  CsvWriter samples_csv({"sample", "modulus"});
  json sample_rows = json::array();
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    samples_csv.add_row({static_cast<long long>(i), rep.samples[i].modulus});
    sample_rows.push_back(json{{"sample", i}, {"modulus", rep.samples[i].modulus}});
  }

  json report;
  report["r0"] = cfg.r0;
  report["t"] = cfg.t;
  report["sublatticeVolume"] = rep.sublattice->size();
  report["dKFull"] = rep.d_k_full;
  report["supModulus"] = rep.sup_modulus;
  report["supIsLowerBound"] = true;  // sampled omega', not the full sup
  report["ltpChecked"] = rep.ltp_checked;
  report["ltpMaxDiff"] = rep.ltp_max_diff;
  report["cCam"] = lc.c_cam;
  report["cCamPositive"] = lc.c_cam_positive;
  report["decimatedBound"] = lc.c_cam_positive ? json(bound) : json();
  report["violated"] = violated;
  report["samples"] = sample_rows;

  tc.emit("decimation_samples.csv", samples_csv.str());
  tc.emit("decimation_report.json", report.dump(2) + "\n");

  if (violated) {
    tc.note_violation();
    return json{{"name", "decimate"}, {"status", "violation"}};
  }
  return json{{"name", "decimate"}, {"status", "ok"}};
}

// -------------------------------------------------------------------- mc

json run_mc_task(TaskContext& tc) {
  const ExperimentConfig& cfg = tc.cfg;
  auto region = std::make_shared<const Region>(cfg.make_region());
  const BoundaryCondition bc = cfg.make_boundary();
  if (cfg.mc.sweeps == 0) throw ValidationError("mc.sweeps: required for the mc task");

  const McResult mc =
      metropolis_run(region, cfg.space, cfg.potential, bc, cfg.beta, cfg.mc, cfg.convention);

  // exact comparison when the enumeration budget allows
  std::optional<SkStatistics> exact;
  double states = 1.0;
  for (std::size_t i = 0; i < region->size(); ++i)
    states *= static_cast<double>(cfg.space.size());
  if (states <= static_cast<double>(cfg.enumeration_budget))
    exact = ExactGibbs::build(region, cfg.space, cfg.potential, bc, cfg.beta, cfg.convention,
                              cfg.enumeration_budget)
                .stats();

  CsvWriter series_csv({"index", "s"});
  for (std::size_t i = 0; i < mc.s_series.size(); ++i)
    series_csv.add_row({static_cast<long long>(i), mc.s_series[i]});

  CsvWriter mass_csv({"s", "pHat", "confRadius", "pExact", "withinRadius"});
  json mass_rows = json::array();
  double worst_dev_radii = 0.0;
  bool all_within = true;
  // iterate the union of observed and exact support
  std::map<long long, bool> support;
  for (const auto& [s, row] : mc.mass) support[s] = true;
  if (exact)
    for (const auto& [s, p] : exact->mass) support[s] = true;
  for (const auto& [s, unused] : support) {
    const McMassRow row = mc.mass.count(s) ? mc.mass.at(s) : McMassRow{};
    const double p_exact = exact && exact->mass.count(s) ? exact->mass.at(s) : 0.0;
    // zero-count values get the radius of a single sample
    const double n_eff = static_cast<double>(mc.s_series.size());
    const double radius = row.conf_radius > 0.0
                              ? row.conf_radius
                              : 3.0 * std::sqrt((1.0 / n_eff) * (1.0 - 1.0 / n_eff) / n_eff);
    const bool within = !exact || std::abs(row.p_hat - p_exact) <= radius;
    all_within = all_within && within;
    if (exact && radius > 0.0)
      worst_dev_radii = std::max(worst_dev_radii, std::abs(row.p_hat - p_exact) / (radius / 3.0));
    mass_csv.add_row({s, row.p_hat, radius, p_exact, within});
    mass_rows.push_back(json{{"s", s},
                             {"pHat", row.p_hat},
                             {"confRadius", radius},
                             {"pExact", exact ? json(p_exact) : json()},
                             {"withinRadius", within}});
  }

  json report;
  report["seed"] = mc.params.seed;
  report["sweeps"] = mc.params.sweeps;
  report["burnIn"] = mc.params.burn_in;
  report["thinning"] = mc.params.thinning;
  report["acceptanceRate"] = mc.acceptance_rate;
  report["sampleCount"] = mc.s_series.size();
  report["sMean"] = mc.s_mean;
  report["sVariance"] = mc.s_variance;
  report["exactAvailable"] = exact.has_value();
  report["allWithinRadius"] = all_within;
  report["worstDeviationSigmas"] = worst_dev_radii;
  report["mass"] = mass_rows;

  tc.emit("mc_series.csv", series_csv.str());
  tc.emit("mc_mass.csv", mass_csv.str());
  tc.emit("mc_report.json", report.dump(2) + "\n");
  return json{{"name", "mc"}, {"status", "ok"}};
}

}  // namespace

RunOutcome run_experiment(const std::filesystem::path& config_path,
                          const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed_override, int threads) {
  return run_experiment_verb(config_path, out_dir, "run", seed_override, threads);
}

RunOutcome run_experiment_verb(const std::filesystem::path& config_path,
                               const std::filesystem::path& out_dir, const std::string& verb,
                               std::optional<std::uint64_t> seed_override, int threads) {
  RunOutcome outcome;
  std::string config_text;
  ExperimentConfig cfg;
  try {
    config_text = read_file(config_path);
    cfg = parse_config(config_text);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    outcome.exit_code = kExitValidation;
    return outcome;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    outcome.exit_code = kExitValidation;
    return outcome;
  }
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.mc.seed = *seed_override;
  }
  if (verb != "run") cfg.tasks = {verb};

  std::filesystem::create_directories(out_dir);
  json manifest;
  manifest["toolVersion"] = std::string(kVersion);
  manifest["configHash"] = hex64(fnv1a64(config_text));
  manifest["seed"] = cfg.seed;
  manifest["truncation"] = {
      {"truncationRadius", cfg.potential.truncation_radius()},
      {"cutoffs",
       {{"maxBonds", cfg.cutoffs.max_bonds},
        {"maxPairRange", cfg.cutoffs.max_pair_range},
        {"restrictToR2", cfg.cutoffs.restrict_to_r2}}},
      {"enumerationBudget", cfg.enumeration_budget}};
  manifest["startedAt"] = iso_timestamp();
  manifest["tasks"] = json::array();
  json files = json::array();

  TaskContext tc{cfg, out_dir, threads, &files};

  // canonical dependency order: constants first, bound checks last
  const std::vector<std::string> order{"bounds", "verify-expansion", "mc",
                                       "lclt",   "charfn",           "decimate"};
  std::vector<std::string> tasks;
  for (const std::string& name : order)
    for (const std::string& task : cfg.tasks)
      if (task == name) tasks.push_back(task);

  for (const std::string& task : tasks) {
    json status;
    try {
      if (task == "bounds") status = run_bounds_task(tc);
      else if (task == "verify-expansion") status = run_verify_expansion_task(tc);
      else if (task == "lclt") status = run_lclt_task(tc);
      else if (task == "charfn") status = run_charfn_task(tc);
      else if (task == "decimate") status = run_decimate_task(tc);
      else status = run_mc_task(tc);
    } catch (const BudgetError& e) {
      status = json{{"name", task}, {"status", "budget-refused"}, {"error", e.what()}};
      tc.worst_exit = std::max(tc.worst_exit, kExitBudget);
      std::cerr << task << ": " << e.what() << "\n";
    } catch (const ValidationError& e) {
      status = json{{"name", task}, {"status", "invalid"}, {"error", e.what()}};
      tc.worst_exit = std::max(tc.worst_exit, kExitValidation);
      std::cerr << task << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
      status = json{{"name", task}, {"status", "invalid"}, {"error", e.what()}};
      tc.worst_exit = std::max(tc.worst_exit, kExitValidation);
      std::cerr << task << ": " << e.what() << "\n";
    }
    manifest["tasks"].push_back(status);
  }

  manifest["finishedAt"] = iso_timestamp();
  manifest["files"] = files;
  manifest["exitCode"] = tc.worst_exit;
  outcome.manifest = out_dir / "run_manifest.json";
  write_file(outcome.manifest, manifest.dump(2) + "\n");
  outcome.exit_code = tc.worst_exit;
  return outcome;
}

int emit_plot_data(const std::filesystem::path& report_json, const std::string& kind,
                   const std::filesystem::path& out_dir) {
  json report;
  try {
    report = json::parse(read_file(report_json));
  } catch (const std::exception& e) {
    std::cerr << "error: cannot read report: " << e.what() << "\n";
    return kExitValidation;
  }

  struct Column {
    std::string header;
    std::string key;
  };
  std::string table_key, file_name;
  std::vector<Column> columns;
  if (kind == "charfn") {
    table_key = "rows";
    file_name = "charfn_grid.csv";
    columns = {{"t", "t"}, {"modulus", "modulus"}, {"bound", "bound"}, {"holds", "holds"}};
  } else if (kind == "lclt") {
    table_key = "lclt";
    file_name = "lclt_trend.csv";
    columns = {{"k", "k"}, {"D_k", "dK"}, {"discrepancy", "supDiscrepancy"}};
  } else if (kind == "iclt") {
    table_key = "iclt";
    file_name = "iclt_trend.csv";
    columns = {{"k", "k"}, {"dkPerSite", "dkPerSite"}, {"ksDistance", "ksDistance"}};
  } else if (kind == "integral") {
    table_key = "integral";
    file_name = "integral_decomposition.csv";
    columns = {{"k", "k"}, {"i1", "i1"}, {"i2", "i2"}, {"i3", "i3"}, {"i4", "i4"},
               {"majorant", "majorant"}};
  } else if (kind == "factorization") {
    table_key = "factorization";
    file_name = "factorization.csv";
    columns = {{"volume", "volume"}, {"beta", "beta"}, {"t", "t"}, {"relError", "relError"}};
  } else if (kind == "series") {
    table_key = "series";
    file_name = "series.csv";
    columns = {{"n", "n"}, {"termCount", "termCount"}, {"absErrorVsLogXi", "absErrorVsLogXi"}};
  } else if (kind == "mc-mass") {
    table_key = "mass";
    file_name = "mc_mass.csv";
    columns = {{"s", "s"}, {"pHat", "pHat"}, {"confRadius", "confRadius"},
               {"withinRadius", "withinRadius"}};
  } else if (kind == "decimation") {
    table_key = "samples";
    file_name = "decimation_samples.csv";
    columns = {{"sample", "sample"}, {"modulus", "modulus"}};
  } else if (kind == "constants-grid") {
    table_key = "grid";
    file_name = "constants_grid.csv";
    columns = {{"beta", "beta"}, {"aBeta", "aBeta"}, {"alphaDeltaBeta", "alphaDeltaBeta"},
               {"alphaBeta", "alphaBeta"}, {"alphaBarCBeta", "alphaBarCBeta"}, {"dBeta", "dBeta"}};
  } else {
    std::cerr << "error: unknown report kind '" << kind << "'\n";
    return kExitValidation;
  }

  if (!report.contains(table_key)) {
    std::cerr << "error: report has no '" << table_key << "' table\n";
    return kExitValidation;
  }

  std::vector<std::string> headers;
  for (const auto& c : columns) headers.push_back(c.header);
  CsvWriter csv(headers);
  for (const json& row : report.at(table_key)) {
    std::vector<CsvWriter::Cell> cells;
    for (const auto& c : columns) {
      const json& v = row.at(c.key);
      if (v.is_boolean()) cells.emplace_back(v.get<bool>());
      else if (v.is_number_integer()) cells.emplace_back(v.get<long long>());
      else if (v.is_number_unsigned()) cells.emplace_back(static_cast<unsigned long long>(v.get<std::uint64_t>()));
      else if (v.is_number()) cells.emplace_back(v.get<double>());
      else cells.emplace_back(v.dump());
    }
    csv.add_row(std::move(cells));
  }
  std::filesystem::create_directories(out_dir);
  csv.write(out_dir / file_name);
  return kExitOk;
}

}  // namespace clexp
