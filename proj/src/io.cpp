#include "memsim/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace memsim {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& points) {
  std::ofstream out = open_out(path);
  out << "t,Psi0,Psi1,Psi2,H0_norm_sq,H1_norm_sq,eta_M0_sq,tail_sup,diff_sq\n";
  for (const auto& p : points) {
    out << format_double(p.t) << ',' << format_double(p.psi0) << ',' << format_double(p.psi1)
        << ',' << format_double(p.psi2) << ',' << format_double(p.h0_norm_sq) << ','
        << format_double(p.h1_norm_sq) << ',' << format_double(p.eta_m0_sq) << ','
        << format_double(p.tail_sup) << ',' << format_double(p.diff_sq) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_paired_csv(const std::string& path, const PairedRecord& rec) {
  std::ofstream out = open_out(path);
  out << "t,Psi0,Psi1,Psi2,H0_norm_sq,H1_norm_sq,eta_M0_sq,tail_sup,diff_sq,hat_norm_sq\n";
  for (std::size_t i = 0; i < rec.points.size(); ++i) {
    const auto& p = rec.points[i];
    out << format_double(p.t) << ',' << format_double(p.psi0) << ',' << format_double(p.psi1)
        << ',' << format_double(p.psi2) << ',' << format_double(p.h0_norm_sq) << ','
        << format_double(p.h1_norm_sq) << ',' << format_double(p.eta_m0_sq) << ','
        << format_double(p.tail_sup) << ',' << format_double(p.diff_sq) << ','
        << format_double(rec.hat_norm_sq[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_spectral_csv(const std::string& path, const std::vector<double>& profile) {
  std::ofstream out = open_out(path);
  out << "k,alpha_k,mean_uk_sq\n";
  for (std::size_t k = 0; k < profile.size(); ++k)
    out << (k + 1) << ',' << format_double(eigenvalue(k + 1)) << ','
        << format_double(profile[k]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_snapshot(const std::string& path, const SpectralField& u, const HistoryField& eta) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  auto put = [&](double v) { out.write(reinterpret_cast<const char*>(&v), sizeof(double)); };
  put(static_cast<double>(u.n_modes()));
  put(static_cast<double>(eta.n_nodes()));
  for (double c : u.coeffs) put(c);
  for (double c : eta.coeffs) put(c);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::in | std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  auto get = [&]() {
    double v;
    in.read(reinterpret_cast<char*>(&v), sizeof(double));
    if (!in) throw std::runtime_error("truncated snapshot: " + path);
    return v;
  };
  Snapshot s;
  s.n_modes = static_cast<std::size_t>(get());
  s.j_nodes = static_cast<std::size_t>(get());
  s.u.resize(s.n_modes);
  for (double& v : s.u) v = get();
  s.eta.resize(s.n_modes * s.j_nodes);
  for (double& v : s.eta) v = get();
  return s;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json measure_to_json(const MeasureEstimate& est) {
  nlohmann::json j;
  j["T"] = est.T;
  j["burn_in"] = est.burn_in;
  j["n_batches"] = est.n_batches;
  j["n_samples"] = est.n_samples;
  j["beta_exp"] = est.beta_exp;
  j["tail_sup_avg"] = est.tail_sup_avg;
  nlohmann::json moments = nlohmann::json::object();
  for (const auto& [name, m] : est.moments)
    moments[name] = {{"estimate", m.estimate}, {"std_error", m.std_error}};
  j["moments"] = moments;
  j["spectral_profile"] = est.spectral_profile;
  return j;
}

nlohmann::json monitor_to_json(const MonitorReport& rep, const std::string& criterion) {
  nlohmann::json j;
  j["name"] = rep.name;
  j["criterion"] = criterion;
  j["verdict"] = rep.pass ? "pass" : "fail";
  j["worst_margin"] = rep.worst_margin;
  j["worst_t"] = rep.worst_t;
  j["constants"] = {{"c0", rep.c0}, {"C0", rep.C0}};
  j["n_points"] = rep.n_points;
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json make_manifest(const std::string& config_text, std::uint64_t seed,
                             std::size_t threads) {
  nlohmann::json j;
  j["config_fnv1a"] = fnv1a(config_text);
  j["seed"] = seed;
  j["threads"] = threads;
  j["format_version"] = 1;
  return j;
}

}  // namespace memsim
