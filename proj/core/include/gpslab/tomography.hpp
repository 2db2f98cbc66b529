#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gpslab/fock.hpp"
#include "gpslab/homodyne.hpp"

namespace gpslab {

// Edges e_0 < ... < e_{M-1} define M + 1 right-closed bins
// (-inf, e_0], (e_0, e_1], ..., (e_{M-1}, +inf).
struct BinnedData {
  std::vector<double> phases_deg;
  std::vector<double> edges;
  std::vector<std::vector<std::int64_t>> counts;  // [phase][bin]

  int bins() const { return static_cast<int>(edges.size()) + 1; }
  std::int64_t total() const;
};

// count + 1 equally spaced edges on [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, int count);
inline constexpr int kDefaultBins = 120;
inline constexpr double kDefaultBinRange = 6.0;

BinnedData bin(const HomodyneDataset& data, std::span<const double> edges);

// Quadrature projectors integrated over each bin. Elements factor as
// Pi_{theta,j} = U_theta G_j U_theta^dag with U_theta = exp(i theta n) and G_j
// real symmetric (already composed with the adjoint loss map when eta < 1).
class PovmSet {
 public:
  PovmSet(std::vector<double> phases_deg, std::vector<double> edges, double eta,
          std::vector<Eigen::MatrixXd> bin_operators);

  int dim() const { return static_cast<int>(bin_ops_.front().rows()); }
  int phases() const { return static_cast<int>(phases_deg_.size()); }
  int bins() const { return static_cast<int>(bin_ops_.size()); }
  double eta() const { return eta_; }
  const std::vector<double>& phases_deg() const { return phases_deg_; }
  const std::vector<double>& edges() const { return edges_; }
  const Eigen::MatrixXd& bin_operator(int bin) const { return bin_ops_[bin]; }

  CMatrix element(int phase, int bin) const;
  // Tr[rho Pi_{theta, j}] for every (phase, bin).
  Eigen::MatrixXd probabilities(const DensityOperator& rho) const;

 private:
  std::vector<double> phases_deg_;
  std::vector<double> edges_;
  double eta_;
  std::vector<Eigen::MatrixXd> bin_ops_;
};

// Gauss-Legendre, 32 nodes per panel; open bins are cut where every phi_m
// with m < dim is negligible. Throws if completeness fails by more than 1e-6.
PovmSet build_povm(std::span<const double> phases_deg, std::span<const double> edges, int dim,
                   double eta = 1.0);

struct MleOptions {
  int max_iter = 2000;
  double tol = 1e-9;  // trace distance between successive iterates
  int dim = 15;
};

struct MleResult {
  DensityOperator rho;
  std::vector<double> loglik_trace;  // mean log-likelihood per sample, per iteration
  int iterations = 0;
  bool converged = false;
  int diluted_steps = 0;  // iterations that fell back to a damped R rho R step
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kProbabilityFloor = 1e-300;

// Observed frequencies f[phase][bin], normalised over the whole data set.
Eigen::MatrixXd frequencies(const BinnedData& data);
double log_likelihood(const DensityOperator& rho, const PovmSet& povm, const Eigen::MatrixXd& freq);
// One N[R rho R] update, R = sum f_j / p_j Pi_j.
DensityOperator rrhor_step(const DensityOperator& rho, const PovmSet& povm, const Eigen::MatrixXd& freq);

// Iterative maximum likelihood from the maximally mixed state. A step that
// would lower the likelihood is replaced by N[(1 + eps R) rho (1 + eps R)]
// with eps halved until the likelihood no longer drops.
MleResult mle_reconstruct(const BinnedData& data, const PovmSet& povm, const MleOptions& opts = {});

}  // namespace gpslab
