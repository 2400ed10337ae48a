#include "glekit/prony.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "glekit/polynomials.hpp"
#include "glekit/regularization.hpp"

namespace glekit {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

MatrixXcd design_matrix(std::span<const cdouble> rates, std::span<const int> lags, double dt) {
  MatrixXcd z(lags.size(), rates.size());
  for (std::size_t i = 0; i < lags.size(); ++i)
    for (std::size_t k = 0; k < rates.size(); ++k)
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::exp(rates[k] * (static_cast<double>(lags[i]) * dt));
  return z;
}

// Hermitian pseudo-inverse with relative eigenvalue cutoff.
MatrixXcd hermitian_pinv(const MatrixXcd& g, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(g);
  if (eig.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  const VectorXd& vals = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  VectorXd inv = VectorXd::Zero(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) > cutoff && vals(i) > 0.0) inv(i) = 1.0 / vals(i);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
}

// Averages paired entries so the series is exactly conjugate-symmetric.
void symmetrize_weights(std::span<const cdouble> rates, VectorXcd& w) {
  double scale = 1.0;
  for (const cdouble& r : rates) scale = std::max(scale, std::abs(r));
  const double tol = 1e-9 * scale;
  for (std::size_t k = 0; k < rates.size();) {
    if (std::abs(rates[k].imag()) <= 0.0) {
      w(static_cast<Eigen::Index>(k)) = w(static_cast<Eigen::Index>(k)).real();
      ++k;
    } else if (k + 1 < rates.size() && std::abs(rates[k + 1] - std::conj(rates[k])) <= tol) {
      const cdouble mean =
          0.5 * (w(static_cast<Eigen::Index>(k)) + std::conj(w(static_cast<Eigen::Index>(k + 1))));
      w(static_cast<Eigen::Index>(k)) = mean;
      w(static_cast<Eigen::Index>(k + 1)) = std::conj(mean);
      k += 2;
    } else {
      ++k;  // unpaired complex mode; left untouched
    }
  }
}

}  // namespace

void PronyConfig::validate(int n_lags) const {
  if (p_prime < 1) throw validation_error("Prony model order must be positive");
  if (2 * p_prime > n_lags)
    throw validation_error("Prony fit needs N >= 2 p' lags (got N = " + std::to_string(n_lags) +
                           ", p' = " + std::to_string(p_prime) + ")");
  if (!(sigma > 0.0)) throw validation_error("decay threshold sigma must be positive");
  if (!(pinv_tol > 0.0)) throw validation_error("pinv_tol must be positive");
  for (std::size_t i = 0; i < lcurve_grid.size(); ++i) {
    if (!(lcurve_grid[i] > 0.0)) throw validation_error("lcurve grid must be strictly positive");
    if (i > 0 && !(lcurve_grid[i] > lcurve_grid[i - 1]))
      throw validation_error("lcurve grid must be sorted ascending");
  }
}

Eigen::VectorXd hankel_coefficients(std::span<const double> values, int p_prime,
                                    double pinv_tol) {
  const int n = static_cast<int>(values.size());
  if (2 * p_prime > n) throw validation_error("Hankel system needs N >= 2 p'");
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw validation_error("degenerate input: all correlation lags are zero");

  const int rows = n - p_prime;
  MatrixXd hankel(rows, p_prime);
  VectorXd rhs(rows);
  // values[j] holds h_{j+1}; row i is (h_{p'+i}, ..., h_{i+1}) with rhs -h_{p'+i+1}.
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < p_prime; ++j) hankel(i, j) = values[static_cast<std::size_t>(p_prime + i - j - 1)];
    rhs(i) = -values[static_cast<std::size_t>(p_prime + i)];
  }
  Eigen::BDCSVD<MatrixXd> svd(hankel, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(pinv_tol);
  return svd.solve(rhs);
}

std::vector<cdouble> characteristic_roots(const Eigen::VectorXd& a) {
  std::vector<double> coeffs(a.data(), a.data() + a.size());
  return companion_roots(coeffs);
}

std::vector<cdouble> regularize_roots(std::span<const cdouble> roots, double dt_obs,
                                      const PronyConfig& cfg, PronyDiagnostics* diag) {
  if (!(dt_obs > 0.0)) throw validation_error("dt_obs must be positive");
  PronyDiagnostics local;
  local.raw_roots.assign(roots.begin(), roots.end());

  // Canonicalize conjugate pairs so downstream symmetry is exact.
  std::vector<cdouble> upper, reals;
  {
    std::vector<cdouble> lower;
    for (const cdouble& r : roots) {
      if (std::abs(r) < 1e-14) {
        ++local.discarded;  // vanishing mode: decays within one sample
        continue;
      }
      if (std::abs(r.imag()) <= 1e-12 * std::abs(r))
        reals.push_back(cdouble(r.real(), 0.0));
      else if (r.imag() > 0.0)
        upper.push_back(r);
      else
        lower.push_back(r);
    }
    for (cdouble& u : upper) {
      auto best = lower.end();
      double best_d = std::numeric_limits<double>::infinity();
      for (auto it = lower.begin(); it != lower.end(); ++it) {
        const double d = std::abs(std::conj(*it) - u);
        if (d < best_d) {
          best_d = d;
          best = it;
        }
      }
      if (best != lower.end() && best_d <= 1e-6 * std::abs(u)) {
        u = 0.5 * (u + std::conj(*best));
        lower.erase(best);
      }
    }
    // Leftover unpaired complex roots get a synthesized conjugate so the
    // reconstruction stays real-valued.
    for (const cdouble& l : lower) upper.push_back(std::conj(l));
  }

  const double threshold =
      cfg.clamp_literal_threshold ? std::exp(-cfg.sigma) : std::exp(-cfg.sigma * dt_obs);

  std::vector<cdouble> rates;
  // n_roots: how many original roots this call stands for (1 for a real
  // root, 2 for a conjugate pair represented by its upper member).
  auto process = [&](cdouble r, int n_roots) {
    cdouble rt = r;
    if (std::abs(rt) >= threshold) {
      rt *= threshold / std::abs(rt);
      local.clamped += n_roots;
    }
    const double angle_from_cut = std::numbers::pi - std::abs(std::arg(rt));
    if (angle_from_cut <= cfg.branch_angle_tol) {
      // On the branch cut: keep both logarithm branches.
      const double re = std::log(std::abs(rt)) / dt_obs;
      const double im = std::numbers::pi / dt_obs;
      rates.emplace_back(re, im);
      rates.emplace_back(re, -im);
      local.augmented += 2 - n_roots;
      return;
    }
    if (n_roots == 2) {
      const cdouble lam = std::log(rt) / dt_obs;
      rates.push_back(lam);
      rates.push_back(std::conj(lam));
    } else {
      rates.emplace_back(std::log(std::abs(rt)) / dt_obs, 0.0);
    }
  };
  for (const cdouble& r : reals) process(r, 1);
  for (const cdouble& u : upper) process(u, 2);

  // Collapse near-duplicate modes (confluent terms are unsupported).
  double scale = 1.0;
  for (const cdouble& r : rates) scale = std::max(scale, std::abs(r));
  std::sort(rates.begin(), rates.end(), [](const cdouble& a, const cdouble& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.imag() > b.imag();
  });
  std::vector<cdouble> dedup;
  for (const cdouble& r : rates) {
    if (!dedup.empty() && std::abs(dedup.back() - r) <= cfg.root_merge_tol * scale) {
      ++local.merged;
      continue;
    }
    dedup.push_back(r);
  }

  if (diag) {
    diag->raw_roots = std::move(local.raw_roots);
    diag->clamped = local.clamped;
    diag->discarded = local.discarded;
    diag->augmented = local.augmented;
    diag->merged = local.merged;
  }
  return dedup;
}

std::vector<cdouble> fit_weights(std::span<const cdouble> rates, std::span<const double> values,
                                 std::span<const int> lags, double dt_obs,
                                 const PronyConfig& cfg, PronyDiagnostics* diag) {
  if (rates.empty()) throw validation_error("weight fit needs at least one mode");
  if (values.size() != lags.size())
    throw validation_error("weight fit needs one lag index per value");
  const Eigen::Index p = static_cast<Eigen::Index>(rates.size());

  const MatrixXcd z = design_matrix(rates, lags, dt_obs);
  VectorXcd y(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) y(static_cast<Eigen::Index>(i)) = values[i];
  const double data_sq = y.squaredNorm();

  // Weights live in the numerical row space of Z. Directions Z cannot see
  // (branch-cut pairs sample to identical columns, so their antisymmetric
  // combination vanishes on the grid) stay at zero; otherwise the equality
  // constraint below would satisfy itself through data-invisible components.
  Eigen::BDCSVD<MatrixXcd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sv_cut = cfg.pinv_tol * svd.singularValues()(0);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > sv_cut) ++rank;
  if (rank == 0) throw validation_error("weight fit: design matrix is numerically zero");
  const MatrixXcd v_r = svd.matrixV().leftCols(rank);

  // Null-space parameterization of sum w_k lambda_k = 0 within the row space.
  MatrixXcd basis = v_r;
  if (cfg.constrain_derivative_zero) {
    VectorXcd lam(p);
    for (Eigen::Index k = 0; k < p; ++k) lam(k) = std::conj(rates[static_cast<std::size_t>(k)]);
    if (lam.norm() == 0.0) throw validation_error("derivative constraint is infeasible: all rates vanish");
    const VectorXcd c = v_r.adjoint() * lam;  // constraint lam^T (v_r u) = c^H-bar form
    if (c.norm() <= 1e-14 * lam.norm()) {
      basis = v_r;  // constraint is degenerate within the visible space
    } else {
      Eigen::HouseholderQR<MatrixXcd> qr(c);
      const MatrixXcd q = qr.householderQ();
      basis = v_r * q.rightCols(rank - 1);
    }
  }

  auto weights_for = [&](double lambda_reg, const MatrixXcd& gram_pinv) -> VectorXcd {
    if (basis.cols() == 0) return VectorXcd::Zero(p);
    const MatrixXcd zb = z * basis;
    if (lambda_reg == 0.0) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(zb);
      return basis * cod.solve(y);
    }
    const MatrixXcd pen = gram_pinv * basis;
    const MatrixXcd normal = zb.adjoint() * zb + lambda_reg * (pen.adjoint() * pen);
    Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(normal);
    return basis * cod.solve(zb.adjoint() * y);
  };

  const MatrixXcd gram = z.adjoint() * z;
  const MatrixXcd gram_pinv = hermitian_pinv(gram, cfg.pinv_tol);

  PronyDiagnostics local;
  VectorXcd w = weights_for(0.0, gram_pinv);
  const double resid0_sq = (z * w - y).squaredNorm();
  if (resid0_sq <= 1e-20 * data_sq || basis.cols() == 0) {
    // Exact fit up to round-off: regularization has nothing to select.
    local.noise_floor_fit = true;
    local.lambda_reg = 0.0;
    local.residual = std::sqrt(resid0_sq);
  } else {
    std::vector<double> grid = cfg.lcurve_grid;
    if (grid.empty()) grid = default_lcurve_grid(gram.real().trace() / static_cast<double>(p));
    std::vector<LCurvePoint> points;
    std::vector<VectorXcd> solutions;
    points.reserve(grid.size());
    for (double lr : grid) {
      const VectorXcd wl = weights_for(lr, gram_pinv);
      points.push_back({lr, (z * wl - y).squaredNorm(), (gram_pinv * wl).squaredNorm()});
      solutions.push_back(wl);
    }
    const std::size_t pick = lcurve_corner(points, data_sq);
    w = solutions[pick];
    local.lambda_reg = points[pick].lambda_reg;
    local.residual = std::sqrt(points[pick].residual_sq);
  }

  symmetrize_weights(rates, w);
  if (diag) {
    diag->lambda_reg = local.lambda_reg;
    diag->residual = local.residual;
    diag->noise_floor_fit = local.noise_floor_fit;
  }
  return std::vector<cdouble>(w.data(), w.data() + w.size());
}

namespace {

PronySeries fit_series(std::span<const double> hankel_values, std::span<const double> fit_values,
                       int first_fit_lag, double dt_obs, const PronyConfig& cfg,
                       PronyDiagnostics* diag) {
  const VectorXd a = hankel_coefficients(hankel_values, cfg.p_prime, cfg.pinv_tol);
  const std::vector<cdouble> roots = characteristic_roots(a);
  const std::vector<cdouble> rates = regularize_roots(roots, dt_obs, cfg, diag);
  std::vector<int> lags(fit_values.size());
  for (std::size_t i = 0; i < lags.size(); ++i) lags[i] = first_fit_lag + static_cast<int>(i);
  const std::vector<cdouble> weights = fit_weights(rates, fit_values, lags, dt_obs, cfg, diag);
  return PronySeries(weights, rates);
}

}  // namespace

PronySeries prony_fit(const CorrelationEstimate& est, const PronyConfig& cfg,
                      PronyDiagnostics* diag) {
  est.validate();
  cfg.validate(est.max_lag());
  return fit_series(est.values_h, est.values_h, 1, est.dt_obs, cfg, diag);
}

PronySeries prony_fit_force_corr(const CorrelationEstimate& est, const PronyConfig& cfg,
                                 PronyDiagnostics* diag) {
  est.validate();
  if (!est.values_phi) throw validation_error("no force correlation present");
  cfg.validate(est.max_lag());
  PronyConfig phi_cfg = cfg;
  phi_cfg.constrain_derivative_zero = false;  // phi'(0) is generally nonzero
  const std::vector<double>& phi = *est.values_phi;
  // Recurrence window on lags 1..N; the lag-0 sample joins the amplitude fit.
  return fit_series(std::span<const double>(phi).subspan(1), phi, 0, est.dt_obs, phi_cfg, diag);
}

}  // namespace glekit
