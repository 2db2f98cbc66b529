#include "gpslab/homodyne.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "gpslab/hash.hpp"
#include "gpslab/io.hpp"

namespace gpslab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Cumulative distribution of p(x; theta) on kSamplingAxis, last entry 1.
std::vector<double> marginal_cdf(const DensityOperator& rho, double theta_deg) {
  const Axis& axis = kSamplingAxis;
  std::vector<double> pdf(static_cast<std::size_t>(axis.n));
  for (int i = 0; i < axis.n; ++i) pdf[i] = std::max(0.0, marginal_density(rho, theta_deg, axis.at(i)));
  std::vector<double> cdf(pdf.size(), 0.0);
  for (std::size_t i = 1; i < pdf.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * (pdf[i - 1] + pdf[i]) * axis.step();
  const double total = cdf.back();
  if (!(total > 0.0)) throw std::domain_error("marginal has no mass on the sampling grid");
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  return cdf;
}

double inverse_cdf(const std::vector<double>& cdf, double u) {
  const Axis& axis = kSamplingAxis;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto j = static_cast<int>(std::clamp<std::ptrdiff_t>(it - cdf.begin(), 1, axis.n - 1));
  const double lo = cdf[j - 1];
  const double hi = cdf[j];
  const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
  return axis.at(j - 1) + std::clamp(frac, 0.0, 1.0) * axis.step();
}

}  // namespace

std::vector<double> reference_phases_deg() { return {0.0, 30.0, 60.0, 90.0, 120.0, 150.0}; }

std::uint64_t phase_subseed(std::uint64_t seed, std::size_t phase_index) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ull * (phase_index + 1)));
}

HomodyneDataset sample(const DensityOperator& rho, std::span<const double> phases_deg, int n_per_phase,
                       double eta_hd, std::uint64_t seed) {
  if (n_per_phase < 0) throw std::invalid_argument("samples per phase must be >= 0");
  const DensityOperator detected = loss_channel(rho, eta_hd);

  HomodyneDataset out;
  out.phases_deg.assign(phases_deg.begin(), phases_deg.end());
  out.seed = seed;
  out.meta.state_hash = sha256_hex(to_json(rho).dump());
  out.meta.eta_hd = eta_hd;
  out.meta.samples_per_phase = n_per_phase;
  out.records.reserve(phases_deg.size() * static_cast<std::size_t>(n_per_phase));

  for (std::size_t i = 0; i < phases_deg.size(); ++i) {
    const std::vector<double> cdf = marginal_cdf(detected, phases_deg[i]);
    std::mt19937_64 engine(phase_subseed(seed, i));
    for (int draw = 0; draw < n_per_phase; ++draw) {
      const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      out.records.push_back({phases_deg[i], inverse_cdf(cdf, u)});
    }
  }
  return out;
}

}  // namespace gpslab
