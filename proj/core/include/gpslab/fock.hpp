#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Truncated single- and two-mode Fock-space algebra.
//
// Quadrature convention used throughout the library: x = (a + a^dag)/sqrt(2),
// p = (a - a^dag)/(i sqrt(2)), vacuum variance 1/2. Fock wavefunctions are
// phi_n(x) = H_n(x) exp(-x^2/2) / (pi^{1/4} sqrt(2^n n!)).

namespace gpslab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr int kDefaultDim = 40;
inline constexpr int kMaxHermiteOrder = 200;
// Captured probability below 1 - kLeakageWarning flags a truncation warning.
inline constexpr double kLeakageWarning = 1e-3;

/// Pure state in a D-dimensional truncated Fock basis; amps[k] multiplies |k>.
class FockState {
 public:
  explicit FockState(CVector amps);

  static FockState basis(int n, int dim);
  static FockState vacuum(int dim) { return basis(0, dim); }

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amps() const { return amps_; }
  Complex operator[](int k) const { return amps_[k]; }

  double norm() const { return amps_.norm(); }
  FockState normalized() const;
  // Zero-pads or truncates to the requested dimension (no renormalisation).
  FockState resized(int dim) const;

 private:
  CVector amps_;
};

/// Mixed state; no physicality is enforced on construction, use validate().
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix mat);

  static DensityOperator pure(const FockState& psi);
  static DensityOperator maximally_mixed(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& mat() const { return mat_; }
  Complex operator()(int m, int k) const { return mat_(m, k); }

  double trace() const { return mat_.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  std::vector<double> photon_distribution() const;
  double mean_photon_number() const;

  DensityOperator normalized() const;
  DensityOperator resized(int dim) const;
  // Hermitian part, rescaled to unit trace.
  DensityOperator symmetrized() const;

 private:
  CMatrix mat_;
};

struct PhysicalityTolerance {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double min_eigenvalue = -1e-8;
};

// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> validate(const DensityOperator& rho,
                                    const PhysicalityTolerance& tol = {});

/// Two-mode pure state; amps(j, k) multiplies |j>_signal |k>_idler.
class TwoModeState {
 public:
  explicit TwoModeState(CMatrix amps);

  static TwoModeState product(const FockState& signal, const FockState& idler);

  int dim() const { return static_cast<int>(amps_.rows()); }
  const CMatrix& amps() const { return amps_; }
  double norm() const { return amps_.norm(); }

  TwoModeState normalized() const;
  // Exchanges the signal and idler labels.
  TwoModeState swapped() const;
  Eigen::VectorXd schmidt_coefficients() const;
  int schmidt_rank(double tol = 1e-9) const;
  double idler_mean_photon_number() const;

 private:
  CMatrix amps_;
};

struct TruncationReport {
  double captured = 1.0;  // squared norm kept by the truncation
  bool warning = false;
};

struct SqueezedVacuum {
  FockState state;
  TruncationReport truncation;
};

double hermite(int n, double x);
double fock_wavefunction(int n, double x);
// phi_0(x) ... phi_{out.size()-1}(x) in one pass of the normalised recurrence.
void fock_wavefunctions(double x, std::span<double> out);

// S(r) |0> rotated so the squeezed axis makes angle axis_rad with x.
// r > 0 at axis 0 squeezes x: Var(x) = exp(-2r)/2. Negative r squeezes p.
SqueezedVacuum squeezed_vacuum(double r, int dim, double axis_rad = 0.0);

// Real-coupling beam splitter:
//   a_out = sqrt(T) a + sqrt(1-T) b,  b_out = -sqrt(1-T) a + sqrt(T) b.
// Output components beyond the truncation are dropped.
TwoModeState beam_splitter(const TwoModeState& state, double transmissivity);
TwoModeState beam_splitter_inverse(const TwoModeState& state, double transmissivity);

// Pure-loss channel with efficiency eta as an exact Kraus sum.
DensityOperator loss_channel(const DensityOperator& rho, double eta);
// Heisenberg-picture (adjoint) loss map, used for loss-aware POVMs.
CMatrix loss_channel_adjoint(const CMatrix& op, double eta);

// Phase rotation exp(-i theta n) rho exp(i theta n).
DensityOperator rotate(const DensityOperator& rho, double theta_rad);

// <psi|rho|psi>, clamped to [0, 1].
double fidelity(const FockState& psi, const DensityOperator& rho);
// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2; dims are zero-padded to match.
double fidelity(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const DensityOperator& a, const DensityOperator& b);

}  // namespace gpslab
