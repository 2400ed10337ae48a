// End-to-end experiment orchestration: config file schema, seeded ensemble
// simulation, the full estimation pipeline, parameter sweeps, and the
// artifact files each stage writes.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "glekit/analysis.hpp"
#include "glekit/correlation.hpp"
#include "glekit/gle_sim.hpp"
#include "glekit/io.hpp"
#include "glekit/laplace_domain.hpp"
#include "glekit/prony.hpp"
#include "glekit/sobolev_regress.hpp"

namespace glekit {

struct SweepSpec {
  std::string axis;          // omega | sigma_obs | ensemble_size | traj_length
  std::vector<double> grid;  // axis values (counts for the discrete axes)
  int trials = 1;
};

struct ExperimentConfig {
  KernelSpec kernel;
  NoiseConfig noise;
  SimConfig sim;
  ObservationConfig observation;
  int ensemble_size = 1;
  int n_lags = 24;
  PronyConfig prony;
  double basis_t_end = 30.0;
  int basis_knots = 30;
  double omega = 0.05;
  std::optional<std::pair<double, double>> alpha;  // unset: selected from the h fit
  std::vector<LossKind> losses = {LossKind::E, LossKind::E1, LossKind::E2};
  bool with_theta_l = true;
  double mollifier_bandwidth = 0.0;  // 0: defaults to the observation timestep
  std::string trajectory_format = "csv";  // csv | binary
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "out";
  std::optional<SweepSpec> sweep;

  // Strict parse: unknown keys are rejected. The canonical dump drives the
  // manifest config hash.
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig parse(const std::string& json_text);
  std::string canonical_json() const;
  std::uint64_t config_hash() const { return fnv1a64(canonical_json()); }
  void validate() const;

  bool force_active() const { return !sim.force.is_zero(); }
  double dt_obs() const { return sim.dt * static_cast<double>(observation.ratio); }
};

// Seed streams, recorded in the manifest:
//   trial base  b_t = derive_seed(master, t)
//   member base s_m = b_t + m
//   noise       derive_seed(s_m, 0);  v0  derive_seed(s_m, 1);  obs  derive_seed(s_m, 2)
std::uint64_t trial_base_seed(std::uint64_t master, int trial);

// Simulates `members` trajectories (parallel over members) and applies the
// observation model; the returned ensemble holds observed series at dt_obs.
TrajectoryEnsemble simulate_observed_ensemble(const ExperimentConfig& cfg,
                                              const NoiseGenerator& noise_gen,
                                              std::uint64_t trial_base, int members);

// Latent (unobserved) trajectories, for sweeps that re-observe.
std::vector<std::vector<double>> simulate_latent_ensemble(const ExperimentConfig& cfg,
                                                          const NoiseGenerator& noise_gen,
                                                          std::uint64_t trial_base, int members,
                                                          std::int64_t n_steps);

struct OracleReport {
  bool have_correlation_truth = false;  // gamma admitted the closed-form h map
  double h_err_sq = 0.0;
  double g_err_sq = 0.0;
  double m_heps = 0.0;
  double m_gamma_upper = 0.0;
  double bound = 0.0;  // (2/m)(M h_err + g_err)
  double gamma_norm_sq = 0.0;
  std::optional<double> err_theta_sq, err_theta1_sq, err_theta2_sq, err_theta_l_sq;
};

struct EstimationResult {
  CorrelationEstimate corr;
  PronySeries h_fit;
  std::optional<PronySeries> phi_fit;
  PronySeries g_fit;
  PronyDiagnostics h_diag, phi_diag;
  AlphaSelection alpha;
  WeightedSpace space;
  std::optional<KernelEstimate> theta, theta1, theta2;
  std::optional<DeltaKernel> theta_l;
  std::optional<OracleReport> oracle;
};

// Correlation -> Prony -> Sobolev regression (+ inverse-Laplace estimator),
// with oracle diagnostics against the configured ground-truth kernel.
EstimationResult estimate_from_ensemble(const ExperimentConfig& cfg,
                                        const TrajectoryEnsemble& observed);

// Re-runs only the omega-dependent stages against existing fits.
void attach_oracle_report(const ExperimentConfig& cfg, EstimationResult& result);

// --- sweeps -----------------------------------------------------------------

struct SweepRow {
  double axis_value = 0.0;
  int trial = 0;
  OracleReport oracle;
};

// Shared-data policy per axis: omega re-estimates one dataset; sigma_obs
// re-observes one latent ensemble; ensemble_size uses nested member
// prefixes; traj_length uses time prefixes of the longest run.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepSpec& sweep);

CsvTable sweep_to_csv(const std::vector<SweepRow>& rows, const std::string& axis);

// --- stage drivers (used by the CLI; paths under cfg.output_dir) ------------

std::vector<std::filesystem::path> stage_simulate(const ExperimentConfig& cfg);
std::filesystem::path stage_correlate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> stage_prony(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> stage_estimate(const ExperimentConfig& cfg);
std::filesystem::path stage_sweep(const ExperimentConfig& cfg);

void write_manifest(const ExperimentConfig& cfg, const std::string& stage,
                    const std::vector<std::filesystem::path>& files);

// Reference five-mode synthetic kernel used by the bundled example configs.
PronySeries sample_kernel_fivemode();

}  // namespace glekit
