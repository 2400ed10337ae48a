#include "glekit/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace glekit {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw validation_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw validation_error("cannot open for reading: " + path.string());
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

json prony_to_json(const PronySeries& series) {
  json modes = json::array();
  for (std::size_t k = 0; k < series.size(); ++k)
    modes.push_back({series.weights()[k].real(), series.weights()[k].imag(),
                     series.rates()[k].real(), series.rates()[k].imag()});
  return json{{"modes", modes}};
}

PronySeries prony_from_json(const json& j) {
  std::vector<cdouble> w, r;
  for (const auto& mode : j.at("modes")) {
    if (!mode.is_array() || mode.size() != 4)
      throw validation_error("malformed Prony mode record");
    w.emplace_back(mode[0].get<double>(), mode[1].get<double>());
    r.emplace_back(mode[2].get<double>(), mode[3].get<double>());
  }
  return PronySeries(std::move(w), std::move(r));
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, std::span<const double> v,
                          double dt) {
  auto out = open_out(path);
  out << "t,v\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    out << format_double(static_cast<double>(i) * dt) << ',' << format_double(v[i]) << '\n';
}

std::vector<double> read_trajectory_csv(const std::filesystem::path& path, double* dt) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,v", 0) != 0)
    throw validation_error("not a trajectory CSV: " + path.string());
  std::vector<double> v;
  double t1 = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw validation_error("malformed trajectory row in " + path.string());
    if (v.size() == 1) t1 = std::stod(cells[0]);
    v.push_back(std::stod(cells[1]));
  }
  if (dt) *dt = v.size() > 1 ? t1 : 0.0;
  return v;
}

namespace {
constexpr std::array<char, 4> kTrajectoryMagic = {'G', 'L', 'T', 'R'};
constexpr std::uint32_t kTrajectoryVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw validation_error("truncated binary trajectory file");
  return value;
}
}  // namespace

void write_trajectory_binary(const std::filesystem::path& path, std::span<const double> v,
                             double dt, std::uint64_t seed) {
  auto out = open_out(path, std::ios::binary);
  out.write(kTrajectoryMagic.data(), kTrajectoryMagic.size());
  write_raw(out, kTrajectoryVersion);
  write_raw(out, static_cast<std::uint64_t>(v.size()));
  write_raw(out, dt);
  write_raw(out, seed);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_trajectory_binary(const std::filesystem::path& path, double* dt,
                                           std::uint64_t* seed) {
  auto in = open_in(path, std::ios::binary);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kTrajectoryMagic)
    throw validation_error("not a binary trajectory block: " + path.string());
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kTrajectoryVersion)
    throw validation_error("unsupported trajectory block version");
  const auto length = read_raw<std::uint64_t>(in);
  const auto dt_value = read_raw<double>(in);
  const auto seed_value = read_raw<std::uint64_t>(in);
  std::vector<double> v(length);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(length * sizeof(double)));
  if (!in) throw validation_error("truncated binary trajectory file");
  if (dt) *dt = dt_value;
  if (seed) *seed = seed_value;
  return v;
}

void write_correlation_csv(const std::filesystem::path& path, const CorrelationEstimate& est) {
  est.validate();
  auto out = open_out(path);
  out << "n,t,h_n,phi_n,count\n";
  const int first = est.values_phi ? 0 : 1;
  for (int n = first; n <= est.max_lag(); ++n) {
    out << n << ',' << format_double(n * est.dt_obs) << ',';
    if (n >= 1) out << format_double(est.values_h[static_cast<std::size_t>(n - 1)]);
    out << ',';
    if (est.values_phi) out << format_double((*est.values_phi)[static_cast<std::size_t>(n)]);
    out << ',';
    out << (n >= 1 ? est.n_terms[static_cast<std::size_t>(n - 1)] : 0) << '\n';
  }
}

CorrelationEstimate read_correlation_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,t,h_n,phi_n,count", 0) != 0)
    throw validation_error("not a correlation CSV: " + path.string());
  CorrelationEstimate est;
  bool has_phi = false;
  std::vector<double> phi;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw validation_error("malformed correlation row");
    const int n = std::stoi(cells[0]);
    if (n >= 1) {
      est.values_h.push_back(std::stod(cells[2]));
      est.n_terms.push_back(std::stoll(cells[4]));
      if (est.dt_obs == 0.0) est.dt_obs = std::stod(cells[1]) / n;
    }
    if (!cells[3].empty()) {
      has_phi = true;
      phi.push_back(std::stod(cells[3]));
    }
  }
  if (has_phi) est.values_phi = std::move(phi);
  est.validate();
  return est;
}

void write_prony_json(const std::filesystem::path& path, const PronySeries& series) {
  auto out = open_out(path);
  out << prony_to_json(series).dump(2) << '\n';
}

PronySeries read_prony_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  return prony_from_json(j);
}

void write_delta_kernel_json(const std::filesystem::path& path, const DeltaKernel& kernel) {
  json j = prony_to_json(kernel.series);
  j["delta_weight"] = kernel.delta_weight;
  j["mollifier_bandwidth"] = kernel.mollifier_bandwidth;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

DeltaKernel read_delta_kernel_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  DeltaKernel kernel;
  kernel.series = prony_from_json(j);
  kernel.delta_weight = j.at("delta_weight").get<double>();
  kernel.mollifier_bandwidth = j.at("mollifier_bandwidth").get<double>();
  return kernel;
}

namespace {
const char* loss_name(LossKind loss) {
  switch (loss) {
    case LossKind::E: return "E";
    case LossKind::E1: return "E1";
    case LossKind::E2: return "E2";
  }
  return "E";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "E") return LossKind::E;
  if (name == "E1") return LossKind::E1;
  if (name == "E2") return LossKind::E2;
  throw validation_error("unknown loss name: " + name);
}
}  // namespace

void write_kernel_estimate(const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path, const KernelEstimate& est) {
  {
    auto out = open_out(csv_path);
    out << "index,knot,coefficient\n";
    const auto bp = est.basis.breakpoints();
    const std::size_t rows = std::max(bp.size(), static_cast<std::size_t>(est.coeffs.size()));
    for (std::size_t i = 0; i < rows; ++i) {
      out << i << ',';
      if (i < bp.size()) out << format_double(bp[i]);
      out << ',';
      if (i < static_cast<std::size_t>(est.coeffs.size()))
        out << format_double(est.coeffs(static_cast<Eigen::Index>(i)));
      out << '\n';
    }
  }
  json meta{{"loss", loss_name(est.loss)},
            {"omega", est.omega},
            {"alpha", {est.alpha1, est.alpha2}},
            {"lambda_reg", est.lambda_reg},
            {"loss_value", est.loss_value},
            {"basis", {{"t_end", est.basis.t_end}, {"knot_count", est.basis.knot_count}}}};
  auto out = open_out(meta_path);
  out << meta.dump(2) << '\n';
}

KernelEstimate read_kernel_estimate(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& meta_path) {
  json meta;
  {
    auto in = open_in(meta_path);
    in >> meta;
  }
  KernelEstimate est;
  est.basis = SplineBasis::clamped_cubic(meta.at("basis").at("t_end").get<double>(),
                                         meta.at("basis").at("knot_count").get<int>());
  est.loss = loss_from_name(meta.at("loss").get<std::string>());
  est.omega = meta.at("omega").get<double>();
  est.alpha1 = meta.at("alpha")[0].get<double>();
  est.alpha2 = meta.at("alpha")[1].get<double>();
  est.lambda_reg = meta.at("lambda_reg").get<double>();
  est.loss_value = meta.at("loss_value").get<double>();

  auto in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,knot,coefficient", 0) != 0)
    throw validation_error("not a kernel-estimate CSV: " + csv_path.string());
  std::vector<double> coeffs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() >= 3 && !cells[2].empty()) coeffs.push_back(std::stod(cells[2]));
  }
  est.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                                 static_cast<Eigen::Index>(coeffs.size()));
  if (est.coeffs.size() != est.basis.size())
    throw validation_error("kernel-estimate coefficient count does not match the basis");
  return est;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << (c + 1 < table.columns.size() ? ',' : '\n');
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw validation_error("CSV row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_double(row[c]) << (c + 1 < row.size() ? ',' : '\n');
  }
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace glekit
