#ifndef MEMSIM_IO_HPP
#define MEMSIM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "memsim/history.hpp"
#include "memsim/integrator.hpp"
#include "memsim/lyapunov.hpp"
#include "memsim/measure.hpp"

namespace memsim {

/// Shortest decimal string that round-trips the 64-bit float exactly.
std::string format_double(double v);

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& points);
void write_paired_csv(const std::string& path, const PairedRecord& rec);
/// Columns k, alpha_k, mean_uk_sq.
void write_spectral_csv(const std::string& path, const std::vector<double>& profile);

/// Flat little-endian doubles: {N, J}, u coefficients, eta row-major.
void write_snapshot(const std::string& path, const SpectralField& u, const HistoryField& eta);
struct Snapshot {
  std::size_t n_modes = 0;
  std::size_t j_nodes = 0;
  std::vector<double> u;
  std::vector<double> eta;  // row-major [k*J + j]
};
Snapshot read_snapshot(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);

nlohmann::json measure_to_json(const MeasureEstimate& est);
nlohmann::json monitor_to_json(const MonitorReport& rep, const std::string& criterion);

/// FNV-1a hash of a byte string, for config fingerprints in manifests.
std::uint64_t fnv1a(const std::string& bytes);

/// Reproducibility manifest: config hash, seed, build metadata.
nlohmann::json make_manifest(const std::string& config_text, std::uint64_t seed,
                             std::size_t threads);

}  // namespace memsim

#endif
