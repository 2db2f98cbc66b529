#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpslab/gps.hpp"
#include "gpslab/io.hpp"
#include "gpslab/phase_space.hpp"

// Command layer behind the gpslab executable. Everything here is callable
// in-process so tests can drive whole runs.

namespace gpslab::cli {

enum ExitCode : int {
  kOk = 0,
  kInputContract = 2,
  kUnheraldable = 3,
  kNumericalFailure = 4,
};

struct HomodyneSection {
  std::vector<double> phases_deg = reference_phases_deg();
  int samples_per_phase = kReferenceSamplesPerPhase;
  double eta_hd = 1.0;
};

struct TomographySection {
  int dim = 15;
  int max_iter = 2000;
  double tol = 1e-9;
  double eta = 1.0;
  int bins = kDefaultBins;
  double bin_range = kDefaultBinRange;  // interior bins cover [-range, range]
};

struct OutputSection {
  GridSpec wigner;
  Axis marginal_axis{-7.0, 7.0, 701};
  double cut_deg = kFringeAxisDeg;
};

struct LabConfig {
  HeraldModel herald_model = HeraldModel::kRealistic;
  GpsConfig gps;
  HomodyneSection homodyne;
  TomographySection tomography;
  OutputSection output;
  std::vector<double> sweep_reflectivities{0.5, 0.4, 0.3};
};

Json to_json(const LabConfig& cfg);
// Strict: unknown sections or keys raise ContractError.
LabConfig lab_config_from_json(const Json& doc);
// Applies "a.b.c=value"; value is parsed as JSON, falling back to a string.
void apply_override(Json& doc, const std::string& assignment);

struct Options {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::vector<std::string> overrides;
  bool force = false;
  std::vector<std::filesystem::path> inputs;
  std::vector<double> reflectivities;
};

// Herald according to cfg.herald_model with cfg.gps.herald_n as the photon or
// click count, then fit Psi_{n,s0}(lambda x).
HeraldedState herald(const LabConfig& cfg, std::ostream& log);

// Runs one command; returns the process exit code. Structured events go to
// log as single-line JSON.
int execute(const Options& opts, std::ostream& out, std::ostream& log);

// argv front end (CLI11).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace gpslab::cli
