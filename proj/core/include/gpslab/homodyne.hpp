#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpslab/fock.hpp"
#include "gpslab/phase_space.hpp"

namespace gpslab {

struct HomodyneRecord {
  double theta_deg = 0.0;
  double x = 0.0;

  bool operator==(const HomodyneRecord&) const = default;
};

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-v1";

struct HomodyneMeta {
  std::string state_hash;
  double eta_hd = 1.0;
  int samples_per_phase = 0;
  std::string rng = kRngAlgorithm;

  bool operator==(const HomodyneMeta&) const = default;
};

struct HomodyneDataset {
  std::vector<double> phases_deg;
  std::vector<HomodyneRecord> records;  // phase-major, draw-minor
  std::uint64_t seed = 0;
  HomodyneMeta meta;

  bool operator==(const HomodyneDataset&) const = default;
};

// 0, 30, ..., 150 degrees.
std::vector<double> reference_phases_deg();
inline constexpr int kReferenceSamplesPerPhase = 20000;

// Inverse-CDF sampling grid: 4001 points on [-8, 8].
inline const Axis kSamplingAxis{-8.0, 8.0, 4001};

// Independent stream per phase: mt19937_64 seeded with splitmix64(seed, index).
std::uint64_t phase_subseed(std::uint64_t seed, std::size_t phase_index);

// Applies loss_channel(eta_hd) and draws n_per_phase quadratures at each angle.
HomodyneDataset sample(const DensityOperator& rho, std::span<const double> phases_deg, int n_per_phase,
                       double eta_hd, std::uint64_t seed);

}  // namespace gpslab
