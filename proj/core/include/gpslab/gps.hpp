#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpslab/fock.hpp"

// Generalized photon subtraction: two squeezed vacua meet on a variable beam
// splitter, photons are counted in the idler output, and the signal output is
// left in the conditional state Psi_{n,s0}(x) ~ phi_0(x)^s0 phi_n(x).

namespace gpslab {

struct Detector {
  double efficiency = 1.0;
  double dark_rate_cps = 0.0;

  bool operator==(const Detector&) const = default;
};

// The four-element SNSPD array of the reference experiment.
std::vector<Detector> reference_detector_bank();

// R = 0.4 with reference_detector_bank() and k = 3 clicks gives 12.2 cps.
inline constexpr double kReferenceModeRateHz = 29686.18922568925;

struct GpsConfig {
  double gain1 = 2.11;
  double gain2 = 2.05;
  double relative_phase_deg = 90.0;  // angle between the input squeezing axes
  double reflectivity = 0.4;
  int herald_n = 3;
  int dim = kDefaultDim;
  double idler_efficiency = 1.0;
  std::vector<Detector> detector_bank = reference_detector_bank();
  double window_s = 100e-9;
  double mode_rate_hz = kReferenceModeRateHz;

  // Gain is quadrature-variance amplification: G = exp(2 r).
  double r1() const;
  double r2() const;
  double transmissivity() const { return 1.0 - reflectivity; }

  // Throws std::invalid_argument naming the first bad field.
  void validate() const;

  bool operator==(const GpsConfig&) const = default;
};

// Reference experiment at a given variable-BS reflectivity.
GpsConfig reference_config(double reflectivity);

class UnheraldableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinHeraldProbability = 1e-15;

struct TwoModeInput {
  TwoModeState state;  // (signal, idler), renormalised after truncation
  TruncationReport truncation;
};

// Squeezed vacuum r1 on x and r2 rotated by relative_phase on the BS inputs.
// The signal is the output port that transmits the second input
// (b_out = -sqrt(1-T) a + sqrt(T) b); the idler is the other port.
TwoModeInput build_input(const GpsConfig& cfg);

struct PureHerald {
  FockState state;
  double probability = 0.0;
};

// Projects the idler on |n> and renormalises the signal.
PureHerald herald_ideal(const TwoModeState& state, int n);

// P(exactly k clicks | m photons) for m = 0..dim-1: photons are split evenly
// over the bank, each detector is an on/off element with efficiency eta_i and
// dark-click probability 1 - exp(-rate_i * window).
std::vector<double> click_povm(std::span<const Detector> bank, double window_s, int k, int dim);
double click_probability(std::span<const Detector> bank, double window_s, int k, int photons);

struct S0Fit {
  double s0 = 0.0;
  double lambda = 1.0;
  double fidelity = 0.0;
  bool model_mismatch = false;  // fidelity below FitOptions::mismatch_threshold
};

struct HeraldedState {
  DensityOperator state;
  double herald_prob = 0.0;
  double event_rate_cps = 0.0;
  std::optional<S0Fit> s0_fit;
};

// Idler loss followed by the exactly-k-click element of the detector bank.
HeraldedState herald_realistic(const GpsConfig& cfg, int k);
HeraldedState herald_realistic(const GpsConfig& cfg, const TwoModeState& input, int k);
// Ideal photon-number heralding on cfg.herald_n, packaged as a HeraldedState.
HeraldedState herald_ideal(const GpsConfig& cfg);

enum class HeraldModel { kIdeal, kRealistic };
HeraldModel parse_herald_model(const std::string& name);
std::string to_string(HeraldModel model);

// Fock coefficients of Psi_{n,s0}(lambda x), normalised. Coefficients of the
// wrong parity are exactly zero.
FockState scaled_target(int n, double s0, double lambda, int dim);
inline FockState analytic_target(int n, double s0, int dim) { return scaled_target(n, s0, 1.0, dim); }

struct FitOptions {
  double s0_min = 1e-3;
  double s0_max = 10.0;
  int s0_points = 33;
  double lambda_min = 0.3;
  double lambda_max = 3.0;
  int lambda_points = 33;
  double simplex_tolerance = 1e-10;
  int max_simplex_iterations = 4000;
  double mismatch_threshold = 0.9;
};

// Maximises <Psi_{n,s0}(lambda x)| rho |Psi_{n,s0}(lambda x)> over s0 >= 0,
// lambda > 0: log-spaced grid seed, then a Nelder-Mead refinement.
S0Fit extract_s0(const DensityOperator& rho, int n, const FitOptions& opts = {});
S0Fit extract_s0(const FockState& psi, int n, const FitOptions& opts = {});

// mode_rate that maps the herald probability of cfg at the given
// reflectivity onto rate_cps.
double calibrate_mode_rate(GpsConfig cfg, double reflectivity, double rate_cps, int clicks);

}  // namespace gpslab
