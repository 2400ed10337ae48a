// On-disk formats: trajectory CSV / binary blocks, correlation CSV,
// Prony-series JSON records, kernel-estimate CSV + metadata, manifests.
//
// Every writer formats doubles with shortest-round-trip precision, so
// outputs are byte-deterministic for a fixed config and seed.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glekit/correlation.hpp"
#include "glekit/laplace_domain.hpp"
#include "glekit/prony_series.hpp"
#include "glekit/sobolev_regress.hpp"

namespace glekit {

// --- trajectories ---------------------------------------------------------

// CSV with header "t,v"; t = index * dt.
void write_trajectory_csv(const std::filesystem::path& path, std::span<const double> v,
                          double dt);
std::vector<double> read_trajectory_csv(const std::filesystem::path& path, double* dt = nullptr);

// Compact block: magic "GLTR", version u32, length u64, dt f64, seed u64,
// then length little-endian f64 samples.
void write_trajectory_binary(const std::filesystem::path& path, std::span<const double> v,
                             double dt, std::uint64_t seed);
std::vector<double> read_trajectory_binary(const std::filesystem::path& path,
                                           double* dt = nullptr, std::uint64_t* seed = nullptr);

// --- correlation ----------------------------------------------------------

// CSV columns: n, t, h_n, phi_n, count  (phi empty when absent; the phi row
// for n = 0 carries count 0 on the h side).
void write_correlation_csv(const std::filesystem::path& path, const CorrelationEstimate& est);
CorrelationEstimate read_correlation_csv(const std::filesystem::path& path);

// --- Prony series / delta kernels -----------------------------------------

// JSON record {"modes": [[re_w, im_w, re_rate, im_rate], ...]}; values
// round-trip bit-exactly.
void write_prony_json(const std::filesystem::path& path, const PronySeries& series);
PronySeries read_prony_json(const std::filesystem::path& path);

// Same record plus {"delta_weight": C, "mollifier_bandwidth": b}.
void write_delta_kernel_json(const std::filesystem::path& path, const DeltaKernel& kernel);
DeltaKernel read_delta_kernel_json(const std::filesystem::path& path);

// --- kernel estimates ------------------------------------------------------

// CSV columns: knot, coefficient (knot list padded with empty cells), plus a
// JSON metadata record (loss, omega, alpha, lambda_reg, loss value).
void write_kernel_estimate(const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path, const KernelEstimate& est);
KernelEstimate read_kernel_estimate(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& meta_path);

// --- generic CSV ------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// --- manifest ---------------------------------------------------------------

// FNV-1a 64-bit over the canonical config dump.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace glekit
