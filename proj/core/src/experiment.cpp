#include "glekit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "glekit/rng.hpp"

namespace glekit {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw validation_error(where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw validation_error("unknown key '" + item.key() + "' in " + where);
}

KernelSpec parse_kernel(const json& j) {
  check_keys(j, "kernel", {"type", "modes", "t", "values"});
  const std::string type = j.at("type").get<std::string>();
  if (type == "prony") {
    std::vector<cdouble> w, r;
    for (const auto& mode : j.at("modes")) {
      if (!mode.is_array() || mode.size() != 4)
        throw validation_error("kernel.modes entries must be [w_re, w_im, rate_re, rate_im]");
      w.emplace_back(mode[0].get<double>(), mode[1].get<double>());
      r.emplace_back(mode[2].get<double>(), mode[3].get<double>());
    }
    return KernelSpec::make_prony(PronySeries(std::move(w), std::move(r)));
  }
  if (type == "power_law") return KernelSpec::make_power_law();
  if (type == "exponential") return KernelSpec::make_exponential();
  if (type == "tabulated")
    return KernelSpec::make_tabulated(j.at("t").get<std::vector<double>>(),
                                      j.at("values").get<std::vector<double>>());
  throw validation_error("unknown kernel type: " + type);
}

json kernel_to_json(const KernelSpec& k) {
  switch (k.kind) {
    case KernelSpec::Kind::prony: {
      json modes = json::array();
      for (std::size_t i = 0; i < k.prony.size(); ++i)
        modes.push_back({k.prony.weights()[i].real(), k.prony.weights()[i].imag(),
                         k.prony.rates()[i].real(), k.prony.rates()[i].imag()});
      return json{{"type", "prony"}, {"modes", modes}};
    }
    case KernelSpec::Kind::power_law:
      return json{{"type", "power_law"}};
    case KernelSpec::Kind::exponential:
      return json{{"type", "exponential"}};
    case KernelSpec::Kind::tabulated:
      return json{{"type", "tabulated"}, {"t", k.grid}, {"values", k.values}};
  }
  throw validation_error("unreachable kernel kind");
}

ForceSpec parse_force(const json& j) {
  check_keys(j, "sim.force", {"type", "mu"});
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return ForceSpec::zero();
  if (type == "linear") return ForceSpec::linear(j.at("mu").get<double>());
  if (type == "double_well") return ForceSpec::double_well();
  throw validation_error("unknown force type: " + type);
}

json force_to_json(const ForceSpec& f) {
  switch (f.kind) {
    case ForceSpec::Kind::zero: return json{{"type", "zero"}};
    case ForceSpec::Kind::linear: return json{{"type", "linear"}, {"mu", f.mu}};
    case ForceSpec::Kind::double_well: return json{{"type", "double_well"}};
    case ForceSpec::Kind::custom: break;
  }
  throw validation_error("custom force callables have no config representation");
}

DriftSpec parse_drift(const json& j) {
  check_keys(j, "sim.drift", {"type"});
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return DriftSpec::zero();
  if (type == "duffing") return DriftSpec::duffing();
  throw validation_error("unknown drift type: " + type);
}

json drift_to_json(const DriftSpec& d) {
  switch (d.kind) {
    case DriftSpec::Kind::zero: return json{{"type", "zero"}};
    case DriftSpec::Kind::duffing: return json{{"type", "duffing"}};
    case DriftSpec::Kind::custom: break;
  }
  throw validation_error("custom drift callables have no config representation");
}

LossKind parse_loss(const std::string& name) {
  if (name == "E") return LossKind::E;
  if (name == "E1") return LossKind::E1;
  if (name == "E2") return LossKind::E2;
  throw validation_error("unknown estimator name: " + name);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"kernel", "noise", "sim", "observation", "ensemble_size", "n_lags", "prony",
              "basis", "space", "estimators", "mollifier_bandwidth", "trajectory_format",
              "seed", "output_dir", "sweep"});

  ExperimentConfig cfg;
  cfg.kernel = parse_kernel(j.at("kernel"));

  {
    const json& n = j.at("noise");
    check_keys(n, "noise", {"beta", "n_freq", "delta_freq"});
    cfg.noise.beta = n.at("beta").get<double>();
    cfg.noise.n_freq = n.at("n_freq").get<int>();
    cfg.noise.delta_freq = n.at("delta_freq").get<double>();
  }
  {
    const json& s = j.at("sim");
    check_keys(s, "sim", {"dt", "n_steps", "v0_std", "force", "drift", "t_mem"});
    cfg.sim.dt = s.at("dt").get<double>();
    cfg.sim.n_steps = s.at("n_steps").get<std::int64_t>();
    cfg.sim.v0_std = s.value("v0_std", 1.0);
    if (s.contains("force")) cfg.sim.force = parse_force(s.at("force"));
    if (s.contains("drift")) cfg.sim.drift = parse_drift(s.at("drift"));
    if (s.contains("t_mem")) cfg.sim.t_mem = s.at("t_mem").get<double>();
  }
  {
    const json& o = j.at("observation");
    check_keys(o, "observation", {"ratio", "sigma_obs", "length_cap"});
    cfg.observation.ratio = o.at("ratio").get<std::int64_t>();
    cfg.observation.sigma_obs = o.at("sigma_obs").get<double>();
    cfg.observation.length_cap = o.at("length_cap").get<std::int64_t>();
  }
  cfg.ensemble_size = j.value("ensemble_size", 1);
  cfg.n_lags = j.value("n_lags", 24);
  if (j.contains("prony")) {
    const json& p = j.at("prony");
    check_keys(p, "prony",
               {"p_prime", "sigma", "constrain_derivative_zero", "clamp_literal_threshold",
                "pinv_tol", "lcurve_grid", "branch_angle_tol", "root_merge_tol"});
    cfg.prony.p_prime = p.value("p_prime", cfg.prony.p_prime);
    cfg.prony.sigma = p.value("sigma", cfg.prony.sigma);
    cfg.prony.constrain_derivative_zero =
        p.value("constrain_derivative_zero", cfg.prony.constrain_derivative_zero);
    cfg.prony.clamp_literal_threshold =
        p.value("clamp_literal_threshold", cfg.prony.clamp_literal_threshold);
    cfg.prony.pinv_tol = p.value("pinv_tol", cfg.prony.pinv_tol);
    if (p.contains("lcurve_grid")) cfg.prony.lcurve_grid = p.at("lcurve_grid").get<std::vector<double>>();
    cfg.prony.branch_angle_tol = p.value("branch_angle_tol", cfg.prony.branch_angle_tol);
    cfg.prony.root_merge_tol = p.value("root_merge_tol", cfg.prony.root_merge_tol);
  }
  {
    const json& b = j.at("basis");
    check_keys(b, "basis", {"t_end", "knot_count"});
    cfg.basis_t_end = b.at("t_end").get<double>();
    cfg.basis_knots = b.at("knot_count").get<int>();
  }
  {
    const json& s = j.at("space");
    check_keys(s, "space", {"omega", "alpha"});
    cfg.omega = s.at("omega").get<double>();
    const json& a = s.at("alpha");
    if (a.is_string()) {
      if (a.get<std::string>() != "auto")
        throw validation_error("space.alpha must be \"auto\" or a [a1, a2] pair");
    } else {
      if (!a.is_array() || a.size() != 2)
        throw validation_error("space.alpha must be \"auto\" or a [a1, a2] pair");
      cfg.alpha = std::make_pair(a[0].get<double>(), a[1].get<double>());
    }
  }
  if (j.contains("estimators")) {
    cfg.losses.clear();
    cfg.with_theta_l = false;
    for (const auto& e : j.at("estimators")) {
      const std::string name = e.get<std::string>();
      if (name == "thetaL")
        cfg.with_theta_l = true;
      else
        cfg.losses.push_back(parse_loss(name));
    }
  }
  cfg.mollifier_bandwidth = j.value("mollifier_bandwidth", 0.0);
  cfg.trajectory_format = j.value("trajectory_format", std::string("csv"));
  cfg.master_seed = j.value("seed", std::uint64_t{1});
  cfg.output_dir = j.value("output_dir", std::string("out"));
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, "sweep", {"axis", "grid", "trials"});
    SweepSpec sweep;
    sweep.axis = s.at("axis").get<std::string>();
    sweep.grid = s.at("grid").get<std::vector<double>>();
    sweep.trials = s.value("trials", 1);
    cfg.sweep = std::move(sweep);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["kernel"] = kernel_to_json(kernel);
  j["noise"] = {{"beta", noise.beta}, {"n_freq", noise.n_freq}, {"delta_freq", noise.delta_freq}};
  j["sim"] = {{"dt", sim.dt},
              {"n_steps", sim.n_steps},
              {"v0_std", sim.v0_std},
              {"force", force_to_json(sim.force)},
              {"drift", drift_to_json(sim.drift)}};
  if (std::isfinite(sim.t_mem)) j["sim"]["t_mem"] = sim.t_mem;
  j["observation"] = {{"ratio", observation.ratio},
                      {"sigma_obs", observation.sigma_obs},
                      {"length_cap", observation.length_cap}};
  j["ensemble_size"] = ensemble_size;
  j["n_lags"] = n_lags;
  j["prony"] = {{"p_prime", prony.p_prime},
                {"sigma", prony.sigma},
                {"constrain_derivative_zero", prony.constrain_derivative_zero},
                {"clamp_literal_threshold", prony.clamp_literal_threshold},
                {"pinv_tol", prony.pinv_tol},
                {"lcurve_grid", prony.lcurve_grid},
                {"branch_angle_tol", prony.branch_angle_tol},
                {"root_merge_tol", prony.root_merge_tol}};
  j["basis"] = {{"t_end", basis_t_end}, {"knot_count", basis_knots}};
  if (alpha)
    j["space"] = {{"omega", omega}, {"alpha", {alpha->first, alpha->second}}};
  else
    j["space"] = {{"omega", omega}, {"alpha", "auto"}};
  json est = json::array();
  for (LossKind l : losses)
    est.push_back(l == LossKind::E ? "E" : (l == LossKind::E1 ? "E1" : "E2"));
  if (with_theta_l) est.push_back("thetaL");
  j["estimators"] = est;
  j["mollifier_bandwidth"] = mollifier_bandwidth;
  j["trajectory_format"] = trajectory_format;
  j["seed"] = master_seed;
  j["output_dir"] = output_dir.string();
  if (sweep)
    j["sweep"] = {{"axis", sweep->axis}, {"grid", sweep->grid}, {"trials", sweep->trials}};
  return j.dump();
}

void ExperimentConfig::validate() const {
  kernel.validate();
  noise.validate();
  sim.validate();
  observation.validate();
  if (ensemble_size < 1) throw validation_error("ensemble_size must be at least 1");
  if (n_lags < 1) throw validation_error("n_lags must be at least 1");
  prony.validate(n_lags);
  if (!(basis_t_end > 0.0) || basis_knots < 2)
    throw validation_error("basis needs t_end > 0 and at least 2 knots");
  if (!(omega > 0.0)) throw validation_error("space.omega must be positive");
  if (alpha && !(alpha->first >= 0.0 && alpha->second >= 0.0))
    throw validation_error("alpha components must be nonnegative");
  if (trajectory_format != "csv" && trajectory_format != "binary")
    throw validation_error("trajectory_format must be csv or binary");
  if (static_cast<std::int64_t>(observation.ratio) * observation.length_cap > sim.n_steps)
    throw validation_error("observation window exceeds the simulated length");
  if (sweep) {
    const std::set<std::string> axes{"omega", "sigma_obs", "ensemble_size", "traj_length"};
    if (!axes.count(sweep->axis)) throw validation_error("unknown sweep axis: " + sweep->axis);
    if (sweep->grid.empty()) throw validation_error("sweep grid is empty");
    if (sweep->trials < 1) throw validation_error("sweep trials must be at least 1");
  }
}

std::uint64_t trial_base_seed(std::uint64_t master, int trial) {
  return derive_seed(master, static_cast<std::uint64_t>(trial));
}

namespace {

std::vector<double> simulate_member(const ExperimentConfig& cfg, const NoiseGenerator& gen,
                                    std::uint64_t member_base, std::int64_t n_steps) {
  const std::vector<double> noise =
      gen.generate(n_steps, cfg.sim.dt, derive_seed(member_base, 0));
  SimConfig sim = cfg.sim;
  sim.n_steps = n_steps;
  return simulate_trajectory(cfg.kernel, sim, noise, derive_seed(member_base, 1));
}

std::vector<double> observe_member(const ExperimentConfig& cfg, std::span<const double> latent,
                                   std::uint64_t member_base, std::int64_t length_cap,
                                   double sigma_obs) {
  ObservationConfig obs = cfg.observation;
  obs.length_cap = length_cap;
  obs.sigma_obs = sigma_obs;
  obs.seed = derive_seed(member_base, 2);
  return observe(latent, obs);
}

}  // namespace

TrajectoryEnsemble simulate_observed_ensemble(const ExperimentConfig& cfg,
                                              const NoiseGenerator& noise_gen,
                                              std::uint64_t trial_base, int members) {
  TrajectoryEnsemble out;
  out.dt = cfg.dt_obs();
  out.members.resize(static_cast<std::size_t>(members));
  parallel_for(members, [&](std::int64_t m) {
    const std::uint64_t base = trial_base + static_cast<std::uint64_t>(m);
    const std::vector<double> latent = simulate_member(cfg, noise_gen, base, cfg.sim.n_steps);
    out.members[static_cast<std::size_t>(m)] =
        observe_member(cfg, latent, base, cfg.observation.length_cap, cfg.observation.sigma_obs);
  });
  return out;
}

std::vector<std::vector<double>> simulate_latent_ensemble(const ExperimentConfig& cfg,
                                                          const NoiseGenerator& noise_gen,
                                                          std::uint64_t trial_base, int members,
                                                          std::int64_t n_steps) {
  std::vector<std::vector<double>> latent(static_cast<std::size_t>(members));
  parallel_for(members, [&](std::int64_t m) {
    const std::uint64_t base = trial_base + static_cast<std::uint64_t>(m);
    latent[static_cast<std::size_t>(m)] = simulate_member(cfg, noise_gen, base, n_steps);
  });
  return latent;
}

namespace {

struct FittedCorrelations {
  CorrelationEstimate corr;
  PronySeries h_fit;
  std::optional<PronySeries> phi_fit;
  PronySeries g_fit;
  PronyDiagnostics h_diag, phi_diag;
  AlphaSelection alpha;
  std::optional<DeltaKernel> theta_l;
};

// Alpha selection and the inverse-transform estimator, shared by the in-memory
// and from-disk paths.
void finalize_fit(const ExperimentConfig& cfg, FittedCorrelations& fit) {
  if (cfg.alpha) {
    const double s = cfg.alpha->first + cfg.alpha->second;
    fit.alpha.alpha1 = cfg.alpha->first / s;
    fit.alpha.alpha2 = cfg.alpha->second / s;
  } else {
    fit.alpha = alpha_from_h(fit.h_fit);
  }
  if (cfg.with_theta_l) {
    ThetaLOptions opts;
    opts.mollifier_bandwidth =
        cfg.mollifier_bandwidth > 0.0 ? cfg.mollifier_bandwidth : cfg.dt_obs();
    try {
      fit.theta_l = theta_L(fit.h_fit, fit.phi_fit, opts);
    } catch (const numeric_error&) {
      // Inverse-transform estimator can fail on ill-conditioned fits; the
      // regression estimators do not depend on it.
      fit.theta_l = std::nullopt;
    }
  }
}

FittedCorrelations fit_from_correlation(const ExperimentConfig& cfg, CorrelationEstimate corr) {
  FittedCorrelations fit;
  fit.corr = std::move(corr);
  fit.h_fit = prony_fit(fit.corr, cfg.prony, &fit.h_diag);
  if (fit.corr.values_phi) {
    fit.phi_fit = prony_fit_force_corr(fit.corr, cfg.prony, &fit.phi_diag);
    fit.g_fit = fit.h_fit.derivative().scaled(-1.0).concat(*fit.phi_fit);
  } else {
    fit.g_fit = fit.h_fit.derivative().scaled(-1.0);
  }
  finalize_fit(cfg, fit);
  return fit;
}

FittedCorrelations fit_correlations(const ExperimentConfig& cfg,
                                    const TrajectoryEnsemble& observed) {
  const std::optional<ForceSpec> force =
      cfg.force_active() ? std::optional<ForceSpec>(cfg.sim.force) : std::nullopt;
  return fit_from_correlation(cfg, ensemble_corr(observed, force, cfg.n_lags));
}

std::optional<PronySeries> prony_ground_truth(const ExperimentConfig& cfg) {
  if (cfg.kernel.kind == KernelSpec::Kind::prony) return cfg.kernel.prony;
  if (cfg.kernel.kind == KernelSpec::Kind::exponential) return PronySeries::single(1.0, -1.0);
  return std::nullopt;
}

OracleReport oracle_report(const ExperimentConfig& cfg, const FittedCorrelations& fit,
                           const WeightedSpace& space, const EstimationResult& result) {
  OracleReport rep;
  const double omega = space.omega;
  const std::optional<PronySeries> gamma = prony_ground_truth(cfg);

  auto estimate_error_sq = [&](const KernelEstimate& est) {
    if (gamma) return l2_rho_norm_sq(probe_difference(*gamma, est), omega);
    KernelSpec kernel = cfg.kernel;
    const double t_max = std::min(est.basis.t_end + std::log(1e16) / (2.0 * omega), 5000.0);
    return l2_rho_norm_sq(
        probe_difference([kernel](double t) { return kernel.eval(t); }, t_max, est), omega);
  };

  if (gamma) {
    rep.have_correlation_truth = true;
    const PronySeries h_true = kernel_to_acf(*gamma, 1.0 / cfg.noise.beta);
    const PronySeries g_true = h_true.derivative().scaled(-1.0);
    rep.h_err_sq = l2_rho_norm_sq(h_true.concat(fit.h_fit.scaled(-1.0)), omega);
    rep.g_err_sq = h1_alpha_norm_sq(g_true.concat(fit.g_fit.scaled(-1.0)), omega, space.alpha1,
                                    space.alpha2);
    rep.m_heps =
        coercivity_bounds(fit.h_fit, omega, space.alpha1, space.alpha2).m_lower;
    rep.m_gamma_upper =
        coercivity_bounds(*gamma, omega, space.alpha1, space.alpha2,
                          TauGridSpec{}, CoercivityFunction::gamma_sobolev).M_upper;
    rep.bound = error_bound(rep.h_err_sq, rep.g_err_sq, rep.m_heps, rep.m_gamma_upper,
                            ErrorBoundCase::estimated_h);
    rep.gamma_norm_sq = l2_rho_norm_sq(*gamma, omega);
  } else {
    KernelSpec kernel = cfg.kernel;
    FunctionProbe probe;
    probe.value = [kernel](double t) { return kernel.eval(t); };
    probe.t_max = std::min(cfg.basis_t_end + std::log(1e16) / (2.0 * omega), 5000.0);
    rep.gamma_norm_sq = l2_rho_norm_sq(probe, omega);
  }

  if (result.theta) rep.err_theta_sq = estimate_error_sq(*result.theta);
  if (result.theta1) rep.err_theta1_sq = estimate_error_sq(*result.theta1);
  if (result.theta2) rep.err_theta2_sq = estimate_error_sq(*result.theta2);
  if (fit.theta_l && fit.theta_l->series.min_decay() <= 0.0) {
    // Unstable inverse-transform estimate: its weighted error is infinite.
    rep.err_theta_l_sq = std::numeric_limits<double>::infinity();
  } else if (fit.theta_l) {
    const DeltaKernel& tl = *fit.theta_l;
    if (gamma && tl.delta_weight == 0.0) {
      rep.err_theta_l_sq = l2_rho_norm_sq(gamma->concat(tl.series.scaled(-1.0)), omega);
    } else {
      KernelSpec kernel = cfg.kernel;
      FunctionProbe probe;
      probe.value = [kernel, tl](double t) { return kernel.eval(t) - tl.eval(t); };
      probe.decay_rate = 0.0;
      probe.t_max = std::min(cfg.basis_t_end + std::log(1e16) / (2.0 * omega), 5000.0);
      if (tl.delta_weight != 0.0) probe.breakpoints = {tl.mollifier_bandwidth, 4.0 * tl.mollifier_bandwidth};
      rep.err_theta_l_sq = l2_rho_norm_sq(probe, omega);
    }
  }
  return rep;
}

EstimationResult regress_at_omega(const ExperimentConfig& cfg, const FittedCorrelations& fit,
                                  double omega) {
  EstimationResult result;
  result.corr = fit.corr;
  result.h_fit = fit.h_fit;
  result.phi_fit = fit.phi_fit;
  result.g_fit = fit.g_fit;
  result.h_diag = fit.h_diag;
  result.phi_diag = fit.phi_diag;
  result.alpha = fit.alpha;
  result.theta_l = fit.theta_l;
  result.space = WeightedSpace{omega, fit.alpha.alpha1, fit.alpha.alpha2};
  result.space.validate();

  const SplineBasis basis = SplineBasis::clamped_cubic(cfg.basis_t_end, cfg.basis_knots);
  const RegressionProblem problem =
      RegressionProblem::assemble(basis, fit.h_fit, fit.g_fit, omega);
  EstimateOptions opts;
  opts.pinv_tol = cfg.prony.pinv_tol;
  opts.lcurve_grid = cfg.prony.lcurve_grid;
  for (LossKind loss : cfg.losses) {
    KernelEstimate est = estimate_kernel(problem, result.space, loss, opts);
    if (loss == LossKind::E) result.theta = std::move(est);
    if (loss == LossKind::E1) result.theta1 = std::move(est);
    if (loss == LossKind::E2) result.theta2 = std::move(est);
  }
  result.oracle = oracle_report(cfg, fit, result.space, result);
  return result;
}

}  // namespace

EstimationResult estimate_from_ensemble(const ExperimentConfig& cfg,
                                        const TrajectoryEnsemble& observed) {
  return regress_at_omega(cfg, fit_correlations(cfg, observed), cfg.omega);
}

void attach_oracle_report(const ExperimentConfig& cfg, EstimationResult& result) {
  FittedCorrelations fit;
  fit.corr = result.corr;
  fit.h_fit = result.h_fit;
  fit.phi_fit = result.phi_fit;
  fit.g_fit = result.g_fit;
  fit.alpha = result.alpha;
  fit.theta_l = result.theta_l;
  result.oracle = oracle_report(cfg, fit, result.space, result);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepSpec& sweep) {
  std::vector<SweepRow> rows;
  const NoiseGenerator noise_gen(cfg.kernel, cfg.noise);

  if (sweep.axis == "omega") {
    for (int trial = 0; trial < sweep.trials; ++trial) {
      const TrajectoryEnsemble observed = simulate_observed_ensemble(
          cfg, noise_gen, trial_base_seed(cfg.master_seed, trial), cfg.ensemble_size);
      const FittedCorrelations fit = fit_correlations(cfg, observed);
      for (double omega : sweep.grid) {
        const EstimationResult res = regress_at_omega(cfg, fit, omega);
        rows.push_back({omega, trial, *res.oracle});
      }
    }
    return rows;
  }

  if (sweep.axis == "sigma_obs") {
    for (int trial = 0; trial < sweep.trials; ++trial) {
      const std::uint64_t base = trial_base_seed(cfg.master_seed, trial);
      const auto latent =
          simulate_latent_ensemble(cfg, noise_gen, base, cfg.ensemble_size, cfg.sim.n_steps);
      for (double sigma : sweep.grid) {
        TrajectoryEnsemble observed;
        observed.dt = cfg.dt_obs();
        observed.members.resize(latent.size());
        for (std::size_t m = 0; m < latent.size(); ++m)
          observed.members[m] = observe_member(cfg, latent[m], base + m,
                                               cfg.observation.length_cap, sigma);
        const EstimationResult res = estimate_from_ensemble(cfg, observed);
        rows.push_back({sigma, trial, *res.oracle});
      }
    }
    return rows;
  }

  if (sweep.axis == "ensemble_size") {
    int max_members = 0;
    for (double g : sweep.grid) max_members = std::max(max_members, static_cast<int>(g));
    for (int trial = 0; trial < sweep.trials; ++trial) {
      const TrajectoryEnsemble observed = simulate_observed_ensemble(
          cfg, noise_gen, trial_base_seed(cfg.master_seed, trial), max_members);
      for (double g : sweep.grid) {
        const int members = static_cast<int>(g);
        TrajectoryEnsemble prefix;
        prefix.dt = observed.dt;
        prefix.members.assign(observed.members.begin(), observed.members.begin() + members);
        const EstimationResult res = estimate_from_ensemble(cfg, prefix);
        rows.push_back({g, trial, *res.oracle});
      }
    }
    return rows;
  }

  if (sweep.axis == "traj_length") {
    std::int64_t max_steps = 0;
    for (double g : sweep.grid) max_steps = std::max(max_steps, static_cast<std::int64_t>(g));
    const double cap_fraction = static_cast<double>(cfg.observation.length_cap) *
                                static_cast<double>(cfg.observation.ratio) /
                                static_cast<double>(cfg.sim.n_steps);
    std::vector<std::vector<SweepRow>> per_trial(static_cast<std::size_t>(sweep.trials));
    parallel_for(sweep.trials, [&](std::int64_t trial) {
      const std::uint64_t base = trial_base_seed(cfg.master_seed, static_cast<int>(trial));
      const auto latent =
          simulate_latent_ensemble(cfg, noise_gen, base, cfg.ensemble_size, max_steps);
      for (double g : sweep.grid) {
        const auto steps = static_cast<std::int64_t>(g);
        TrajectoryEnsemble observed;
        observed.dt = cfg.dt_obs();
        observed.members.resize(latent.size());
        for (std::size_t m = 0; m < latent.size(); ++m) {
          const std::span<const double> window(latent[m].data(),
                                               static_cast<std::size_t>(steps));
          std::int64_t cap = static_cast<std::int64_t>(cap_fraction * static_cast<double>(steps) /
                                                       static_cast<double>(cfg.observation.ratio));
          cap = std::max<std::int64_t>(cap, cfg.n_lags + 2);
          cap = std::min(cap, steps / cfg.observation.ratio);
          observed.members[m] = observe_member(cfg, window, base + m, cap,
                                               cfg.observation.sigma_obs);
        }
        const EstimationResult res = estimate_from_ensemble(cfg, observed);
        per_trial[static_cast<std::size_t>(trial)].push_back(
            {static_cast<double>(steps), static_cast<int>(trial), *res.oracle});
      }
    });
    for (auto& tr : per_trial) rows.insert(rows.end(), tr.begin(), tr.end());
    return rows;
  }

  throw validation_error("unknown sweep axis: " + sweep.axis);
}

CsvTable sweep_to_csv(const std::vector<SweepRow>& rows, const std::string& axis) {
  CsvTable table;
  table.columns = {axis,
                   "trial",
                   "err_theta_sq",
                   "err_theta1_sq",
                   "err_theta2_sq",
                   "err_theta_l_sq",
                   "bound",
                   "m_heps",
                   "M_gamma",
                   "h_err_sq",
                   "g_err_sq",
                   "gamma_norm_sq",
                   "rel_err_theta"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& row : rows) {
    const OracleReport& o = row.oracle;
    const double err_theta = o.err_theta_sq.value_or(nan);
    table.rows.push_back({row.axis_value, static_cast<double>(row.trial), err_theta,
                          o.err_theta1_sq.value_or(nan), o.err_theta2_sq.value_or(nan),
                          o.err_theta_l_sq.value_or(nan),
                          o.have_correlation_truth ? o.bound : nan,
                          o.have_correlation_truth ? o.m_heps : nan,
                          o.have_correlation_truth ? o.m_gamma_upper : nan,
                          o.have_correlation_truth ? o.h_err_sq : nan,
                          o.have_correlation_truth ? o.g_err_sq : nan, o.gamma_norm_sq,
                          o.gamma_norm_sq > 0.0 ? err_theta / o.gamma_norm_sq : nan});
  }
  return table;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string member_stem(const char* prefix, int m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, m);
  return buf;
}

json oracle_to_json(const OracleReport& o) {
  json j;
  j["gamma_norm_sq"] = o.gamma_norm_sq;
  if (o.have_correlation_truth) {
    j["h_err_sq"] = o.h_err_sq;
    j["g_err_sq"] = o.g_err_sq;
    j["m_heps"] = o.m_heps;
    j["M_gamma"] = o.m_gamma_upper;
    j["bound"] = o.bound;
  }
  if (o.err_theta_sq) j["err_theta_sq"] = *o.err_theta_sq;
  if (o.err_theta1_sq) j["err_theta1_sq"] = *o.err_theta1_sq;
  if (o.err_theta2_sq) j["err_theta2_sq"] = *o.err_theta2_sq;
  if (o.err_theta_l_sq) j["err_theta_l_sq"] = *o.err_theta_l_sq;
  return j;
}

TrajectoryEnsemble load_observed_ensemble(const ExperimentConfig& cfg) {
  TrajectoryEnsemble observed;
  observed.dt = cfg.dt_obs();
  for (int m = 0; m < cfg.ensemble_size; ++m) {
    const auto path = cfg.output_dir / (member_stem("obs", m) + ".csv");
    if (!std::filesystem::exists(path))
      throw validation_error("missing stage-1 artifact: " + path.string() +
                             " (run the simulate stage first)");
    observed.members.push_back(read_trajectory_csv(path));
  }
  return observed;
}

}  // namespace

void write_manifest(const ExperimentConfig& cfg, const std::string& stage,
                    const std::vector<std::filesystem::path>& files) {
  json j;
  j["stage"] = stage;
  j["config_hash"] = hex64(cfg.config_hash());
  j["master_seed"] = cfg.master_seed;
  j["seed_scheme"] =
      "trial base b_t = splitmix(master, t); member base s_m = b_t + m; "
      "streams: noise = derive(s_m, 0), v0 = derive(s_m, 1), observation = derive(s_m, 2)";
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  j["files"] = names;
  j["timestamp"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch()).count());
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / ("manifest_" + stage + ".json"));
  out << j.dump(2) << '\n';
}

std::vector<std::filesystem::path> stage_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  const NoiseGenerator gen(cfg.kernel, cfg.noise);
  const std::uint64_t base = trial_base_seed(cfg.master_seed, 0);
  std::vector<std::filesystem::path> files(static_cast<std::size_t>(2 * cfg.ensemble_size));
  parallel_for(cfg.ensemble_size, [&](std::int64_t m) {
    const std::uint64_t member_base = base + static_cast<std::uint64_t>(m);
    const std::vector<double> latent = simulate_member(cfg, gen, member_base, cfg.sim.n_steps);
    const std::vector<double> obs = observe_member(cfg, latent, member_base,
                                                   cfg.observation.length_cap,
                                                   cfg.observation.sigma_obs);
    std::filesystem::path traj_path;
    if (cfg.trajectory_format == "binary") {
      traj_path = cfg.output_dir / (member_stem("traj", static_cast<int>(m)) + ".bin");
      write_trajectory_binary(traj_path, latent, cfg.sim.dt, member_base);
    } else {
      traj_path = cfg.output_dir / (member_stem("traj", static_cast<int>(m)) + ".csv");
      write_trajectory_csv(traj_path, latent, cfg.sim.dt);
    }
    const auto obs_path = cfg.output_dir / (member_stem("obs", static_cast<int>(m)) + ".csv");
    write_trajectory_csv(obs_path, obs, cfg.dt_obs());
    files[static_cast<std::size_t>(2 * m)] = traj_path;
    files[static_cast<std::size_t>(2 * m + 1)] = obs_path;
  });
  write_manifest(cfg, "simulate", files);
  return files;
}

std::filesystem::path stage_correlate(const ExperimentConfig& cfg) {
  const TrajectoryEnsemble observed = load_observed_ensemble(cfg);
  const std::optional<ForceSpec> force =
      cfg.force_active() ? std::optional<ForceSpec>(cfg.sim.force) : std::nullopt;
  const CorrelationEstimate corr = ensemble_corr(observed, force, cfg.n_lags);
  const auto path = cfg.output_dir / "correlation.csv";
  write_correlation_csv(path, corr);
  write_manifest(cfg, "correlate", {path});
  return path;
}

std::vector<std::filesystem::path> stage_prony(const ExperimentConfig& cfg) {
  const auto corr_path = cfg.output_dir / "correlation.csv";
  if (!std::filesystem::exists(corr_path))
    throw validation_error("missing stage-2 artifact: " + corr_path.string() +
                           " (run the correlate stage first)");
  const CorrelationEstimate corr = read_correlation_csv(corr_path);
  PronyDiagnostics h_diag, phi_diag;
  const PronySeries h_fit = prony_fit(corr, cfg.prony, &h_diag);
  std::vector<std::filesystem::path> files;
  const auto h_path = cfg.output_dir / "h_fit.json";
  write_prony_json(h_path, h_fit);
  files.push_back(h_path);
  json diag{{"h", {{"residual", h_diag.residual},
                   {"lambda_reg", h_diag.lambda_reg},
                   {"clamped", h_diag.clamped},
                   {"augmented", h_diag.augmented},
                   {"discarded", h_diag.discarded},
                   {"merged", h_diag.merged},
                   {"noise_floor_fit", h_diag.noise_floor_fit}}}};
  if (corr.values_phi) {
    const PronySeries phi_fit = prony_fit_force_corr(corr, cfg.prony, &phi_diag);
    const auto phi_path = cfg.output_dir / "phi_fit.json";
    write_prony_json(phi_path, phi_fit);
    files.push_back(phi_path);
    diag["phi"] = {{"residual", phi_diag.residual},
                   {"lambda_reg", phi_diag.lambda_reg},
                   {"clamped", phi_diag.clamped},
                   {"augmented", phi_diag.augmented},
                   {"discarded", phi_diag.discarded},
                   {"merged", phi_diag.merged},
                   {"noise_floor_fit", phi_diag.noise_floor_fit}};
  }
  const auto diag_path = cfg.output_dir / "prony_diagnostics.json";
  {
    std::ofstream out(diag_path);
    out << diag.dump(2) << '\n';
  }
  files.push_back(diag_path);
  write_manifest(cfg, "prony", files);
  return files;
}

std::vector<std::filesystem::path> stage_estimate(const ExperimentConfig& cfg) {
  // Pick up the latest available stage artifacts and compute the rest.
  const auto corr_path = cfg.output_dir / "correlation.csv";
  const auto h_path = cfg.output_dir / "h_fit.json";

  FittedCorrelations fit;
  if (std::filesystem::exists(h_path) && std::filesystem::exists(corr_path)) {
    fit.corr = read_correlation_csv(corr_path);
    fit.h_fit = read_prony_json(h_path);
    const auto phi_path = cfg.output_dir / "phi_fit.json";
    if (std::filesystem::exists(phi_path)) {
      fit.phi_fit = read_prony_json(phi_path);
      fit.g_fit = fit.h_fit.derivative().scaled(-1.0).concat(*fit.phi_fit);
    } else {
      fit.g_fit = fit.h_fit.derivative().scaled(-1.0);
    }
    finalize_fit(cfg, fit);
  } else if (std::filesystem::exists(corr_path)) {
    fit = fit_from_correlation(cfg, read_correlation_csv(corr_path));
  } else {
    fit = fit_correlations(cfg, load_observed_ensemble(cfg));
  }

  const EstimationResult result = regress_at_omega(cfg, fit, cfg.omega);
  std::vector<std::filesystem::path> files;

  auto dump_estimate = [&](const KernelEstimate& est, const std::string& name) {
    const auto csv = cfg.output_dir / ("kernel_" + name + ".csv");
    const auto meta = cfg.output_dir / ("kernel_" + name + ".meta.json");
    write_kernel_estimate(csv, meta, est);
    files.push_back(csv);
    files.push_back(meta);
  };
  if (result.theta) dump_estimate(*result.theta, "E");
  if (result.theta1) dump_estimate(*result.theta1, "E1");
  if (result.theta2) dump_estimate(*result.theta2, "E2");
  if (result.theta_l) {
    const auto path = cfg.output_dir / "theta_L.json";
    write_delta_kernel_json(path, *result.theta_l);
    files.push_back(path);
  }
  if (!std::filesystem::exists(h_path)) {
    write_prony_json(cfg.output_dir / "h_fit.json", result.h_fit);
    files.push_back(cfg.output_dir / "h_fit.json");
    if (result.phi_fit) {
      write_prony_json(cfg.output_dir / "phi_fit.json", *result.phi_fit);
      files.push_back(cfg.output_dir / "phi_fit.json");
    }
  }
  if (!std::filesystem::exists(corr_path) && !result.corr.values_h.empty()) {
    write_correlation_csv(corr_path, result.corr);
    files.push_back(corr_path);
  }

  // Coercivity scan of the fitted h (figure panel data).
  {
    const CoercivityReport scan = coercivity_bounds(result.h_fit, result.space.omega,
                                                    result.space.alpha1, result.space.alpha2);
    CsvTable table;
    table.columns = {"tau", "q"};
    for (std::size_t i = 0; i < scan.tau_grid.size(); ++i)
      table.rows.push_back({scan.tau_grid[i], scan.q_values[i]});
    const auto path = cfg.output_dir / "coercivity_scan.csv";
    write_csv(path, table);
    files.push_back(path);
  }

  json report;
  report["alpha"] = {{"alpha1", result.space.alpha1},
                     {"alpha2", result.space.alpha2},
                     {"alpha1_raw", result.alpha.alpha1_raw},
                     {"alpha2_raw", result.alpha.alpha2_raw}};
  report["omega"] = result.space.omega;
  report["prony"] = {{"residual", result.h_diag.residual},
                     {"lambda_reg", result.h_diag.lambda_reg},
                     {"modes", result.h_fit.size()}};
  if (result.theta)
    report["theta"] = {{"lambda_reg", result.theta->lambda_reg},
                       {"loss_value", result.theta->loss_value}};
  if (result.oracle) report["oracle"] = oracle_to_json(*result.oracle);
  const auto report_path = cfg.output_dir / "report.json";
  {
    std::ofstream out(report_path);
    out << report.dump(2) << '\n';
  }
  files.push_back(report_path);
  write_manifest(cfg, "estimate", files);
  return files;
}

std::filesystem::path stage_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw validation_error("config has no sweep section");
  const std::vector<SweepRow> rows = run_sweep(cfg, *cfg.sweep);
  const CsvTable table = sweep_to_csv(rows, cfg.sweep->axis);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / "sweep.csv";
  write_csv(path, table);
  write_manifest(cfg, "sweep", {path});
  return path;
}

PronySeries sample_kernel_fivemode() {
  return PronySeries({cdouble(0.3488, 0.0), cdouble(0.3488, 0.0), cdouble(0.3615, 0.0),
                      cdouble(0.5300, 0.0), cdouble(0.3045, 0.0)},
                     {cdouble(-0.1631, -0.3211), cdouble(-0.1631, 0.3211),
                      cdouble(-0.8262, 0.0), cdouble(-0.9178, 0.0), cdouble(-0.3352, 0.0)});
}

}  // namespace glekit
