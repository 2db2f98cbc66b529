#include "gpslab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gpslab {

namespace {

void require_dim(int dim) {
  if (dim < 1) throw std::invalid_argument("truncation dimension must be >= 1");
}

// Binomial weight C(n, l) eta^(n-l) (1-eta)^l.
Eigen::MatrixXd bernoulli_table(int dim, double eta) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    for (int l = 0; l <= n; ++l) {
      const double log_binom =
          std::lgamma(n + 1.0) - std::lgamma(l + 1.0) - std::lgamma(n - l + 1.0);
      w(n, l) = std::exp(log_binom) * std::pow(eta, n - l) * std::pow(1.0 - eta, l);
    }
  }
  return w;
}

void require_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::domain_error("efficiency must lie in [0, 1]");
  }
}

Eigen::MatrixXcd hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Applies (ca a^dag + cb b^dag) to a vector over |p, m-p>, p = 0..m.
std::vector<double> raise(const std::vector<double>& v, int m, double ca, double cb) {
  std::vector<double> w(static_cast<std::size_t>(m) + 2, 0.0);
  for (int p = 0; p <= m; ++p) {
    const double amp = v[p];
    if (amp == 0.0) continue;
    w[p + 1] += ca * std::sqrt(p + 1.0) * amp;
    w[p] += cb * std::sqrt(m - p + 1.0) * amp;
  }
  return w;
}

// Rotates |j>|k> as (A^dag)^j (B^dag)^k |0,0> / sqrt(j! k!) with
// A^dag = t a^dag + s_a b^dag and B^dag = s_b a^dag + t b^dag.
TwoModeState apply_real_bs(const TwoModeState& in, double t, double s_a, double s_b) {
  const int dim = in.dim();
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int total = 0; total <= 2 * (dim - 1); ++total) {
    for (int j = std::max(0, total - dim + 1); j <= std::min(total, dim - 1); ++j) {
      const int k = total - j;
      const Complex amp = in.amps()(j, k);
      if (amp == Complex{}) continue;
      std::vector<double> v{1.0};
      int m = 0;
      for (int step = 1; step <= k; ++step, ++m) {
        v = raise(v, m, s_b, t);
        for (double& x : v) x /= std::sqrt(static_cast<double>(step));
      }
      for (int step = 1; step <= j; ++step, ++m) {
        v = raise(v, m, t, s_a);
        for (double& x : v) x /= std::sqrt(static_cast<double>(step));
      }
      for (int p = std::max(0, total - dim + 1); p <= std::min(total, dim - 1); ++p) {
        out(p, total - p) += v[p] * amp;
      }
    }
  }
  return TwoModeState(std::move(out));
}

void require_transmissivity(double transmissivity) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw std::domain_error("transmissivity must lie in [0, 1]");
  }
}

}  // namespace

// ---------------------------------------------------------------- FockState

FockState::FockState(CVector amps) : amps_(std::move(amps)) {
  require_dim(static_cast<int>(amps_.size()));
}

FockState FockState::basis(int n, int dim) {
  require_dim(dim);
  if (n < 0 || n >= dim) throw std::out_of_range("Fock index outside truncation");
  CVector v = CVector::Zero(dim);
  v[n] = 1.0;
  return FockState(std::move(v));
}

FockState FockState::normalized() const {
  const double nrm = norm();
  if (nrm == 0.0) throw std::domain_error("cannot normalise a zero vector");
  return FockState(amps_ / nrm);
}

FockState FockState::resized(int dim) const {
  require_dim(dim);
  CVector v = CVector::Zero(dim);
  const int keep = std::min(dim, this->dim());
  v.head(keep) = amps_.head(keep);
  return FockState(std::move(v));
}

// ---------------------------------------------------------- DensityOperator

DensityOperator::DensityOperator(CMatrix mat) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw std::invalid_argument("density matrix must be square");
  require_dim(static_cast<int>(mat_.rows()));
}

DensityOperator DensityOperator::pure(const FockState& psi) {
  return DensityOperator(psi.amps() * psi.amps().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
  require_dim(dim);
  return DensityOperator(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityOperator::hermiticity_error() const {
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  const CMatrix h = 0.5 * (mat_ + mat_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<double> DensityOperator::photon_distribution() const {
  std::vector<double> p(static_cast<std::size_t>(dim()));
  for (int n = 0; n < dim(); ++n) p[n] = mat_(n, n).real();
  return p;
}

double DensityOperator::mean_photon_number() const {
  double mean = 0.0;
  for (int n = 0; n < dim(); ++n) mean += n * mat_(n, n).real();
  return mean;
}

DensityOperator DensityOperator::normalized() const {
  const double tr = trace();
  if (!(tr > 0.0)) throw std::domain_error("cannot normalise an operator with non-positive trace");
  return DensityOperator(mat_ / tr);
}

DensityOperator DensityOperator::resized(int dim) const {
  require_dim(dim);
  CMatrix m = CMatrix::Zero(dim, dim);
  const int keep = std::min(dim, this->dim());
  m.topLeftCorner(keep, keep) = mat_.topLeftCorner(keep, keep);
  return DensityOperator(std::move(m));
}

DensityOperator DensityOperator::symmetrized() const {
  return DensityOperator(0.5 * (mat_ + mat_.adjoint())).normalized();
}

std::optional<std::string> validate(const DensityOperator& rho, const PhysicalityTolerance& tol) {
  std::ostringstream msg;
  if (!rho.mat().allFinite()) return "non-finite matrix element";
  if (const double h = rho.hermiticity_error(); h > tol.hermiticity) {
    msg << "not Hermitian (max |rho - rho^dag| = " << h << ")";
    return msg.str();
  }
  if (const double tr = rho.trace(); std::abs(tr - 1.0) > tol.trace) {
    msg << "trace " << tr << " != 1";
    return msg.str();
  }
  if (const double ev = rho.min_eigenvalue(); ev < tol.min_eigenvalue) {
    msg << "negative eigenvalue " << ev;
    return msg.str();
  }
  return std::nullopt;
}

// ------------------------------------------------------------- TwoModeState

TwoModeState::TwoModeState(CMatrix amps) : amps_(std::move(amps)) {
  if (amps_.rows() != amps_.cols()) throw std::invalid_argument("two-mode amplitudes must be D x D");
  require_dim(static_cast<int>(amps_.rows()));
}

TwoModeState TwoModeState::product(const FockState& signal, const FockState& idler) {
  if (signal.dim() != idler.dim()) throw std::invalid_argument("mode truncations differ");
  return TwoModeState(signal.amps() * idler.amps().transpose());
}

TwoModeState TwoModeState::normalized() const {
  const double nrm = norm();
  if (nrm == 0.0) throw std::domain_error("cannot normalise a zero state");
  return TwoModeState(amps_ / nrm);
}

TwoModeState TwoModeState::swapped() const { return TwoModeState(amps_.transpose()); }

Eigen::VectorXd TwoModeState::schmidt_coefficients() const {
  Eigen::JacobiSVD<CMatrix> svd(amps_);
  return svd.singularValues();
}

int TwoModeState::schmidt_rank(double tol) const {
  const Eigen::VectorXd s = schmidt_coefficients();
  return static_cast<int>((s.array() > tol).count());
}

double TwoModeState::idler_mean_photon_number() const {
  double mean = 0.0;
  for (int k = 0; k < dim(); ++k) mean += k * amps_.col(k).squaredNorm();
  return mean / amps_.squaredNorm();
}

// --------------------------------------------------------------- functions

double hermite(int n, double x) {
  if (n < 0 || n > kMaxHermiteOrder) throw std::domain_error("Hermite order outside [0, 200]");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void fock_wavefunctions(double x, std::span<double> out) {
  if (out.empty()) return;
  if (static_cast<int>(out.size()) > kMaxHermiteOrder + 1) {
    throw std::domain_error("Fock order outside [0, 200]");
  }
  // phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}; the
  // 1/sqrt(2^n n!) normalisation is absorbed step by step.
  out[0] = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
  if (out.size() == 1) return;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * x * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

double fock_wavefunction(int n, double x) {
  if (n < 0 || n > kMaxHermiteOrder) throw std::domain_error("Fock order outside [0, 200]");
  std::vector<double> phi(static_cast<std::size_t>(n) + 1);
  fock_wavefunctions(x, phi);
  return phi[n];
}

SqueezedVacuum squeezed_vacuum(double r, int dim, double axis_rad) {
  require_dim(dim);
  if (!(std::abs(r) <= 3.0)) throw std::domain_error("|r| must not exceed 3");
  CVector c = CVector::Zero(dim);
  const double th = std::tanh(r);
  double amp = std::sqrt(1.0 / std::cosh(r));
  double captured = 0.0;
  for (int n = 0; n < dim; n += 2) {
    // c_{2k} = sqrt(sech r) (-tanh r)^k sqrt((2k)!) / (2^k k!)
    c[n] = amp * std::polar(1.0, -n * axis_rad);
    captured += amp * amp;
    amp *= -th * std::sqrt((n + 1.0) / (n + 2.0));
  }
  SqueezedVacuum out{FockState(c / std::sqrt(captured)), {}};
  out.truncation.captured = captured;
  out.truncation.warning = captured < 1.0 - kLeakageWarning;
  return out;
}

TwoModeState beam_splitter(const TwoModeState& state, double transmissivity) {
  require_transmissivity(transmissivity);
  const double t = std::sqrt(transmissivity);
  const double s = std::sqrt(1.0 - transmissivity);
  // Input creation operators in terms of output ones:
  // a^dag -> t a^dag - s b^dag, b^dag -> s a^dag + t b^dag.
  return apply_real_bs(state, t, -s, s);
}

TwoModeState beam_splitter_inverse(const TwoModeState& state, double transmissivity) {
  require_transmissivity(transmissivity);
  const double t = std::sqrt(transmissivity);
  const double s = std::sqrt(1.0 - transmissivity);
  return apply_real_bs(state, t, s, -s);
}

DensityOperator loss_channel(const DensityOperator& rho, double eta) {
  require_efficiency(eta);
  const int dim = rho.dim();
  const Eigen::MatrixXd w = bernoulli_table(dim, eta);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      const Complex v = rho(m, n);
      if (v == Complex{}) continue;
      for (int l = 0; l <= std::min(m, n); ++l) {
        out(m - l, n - l) += std::sqrt(w(m, l) * w(n, l)) * v;
      }
    }
  }
  return DensityOperator(std::move(out));
}

CMatrix loss_channel_adjoint(const CMatrix& op, double eta) {
  require_efficiency(eta);
  if (op.rows() != op.cols()) throw std::invalid_argument("operator must be square");
  const int dim = static_cast<int>(op.rows());
  const Eigen::MatrixXd w = bernoulli_table(dim, eta);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      Complex acc{};
      for (int l = 0; l <= std::min(m, n); ++l) acc += std::sqrt(w(m, l) * w(n, l)) * op(m - l, n - l);
      out(m, n) = acc;
    }
  }
  return out;
}

DensityOperator rotate(const DensityOperator& rho, double theta_rad) {
  CMatrix out = rho.mat();
  for (int m = 0; m < rho.dim(); ++m) {
    for (int k = 0; k < rho.dim(); ++k) out(m, k) *= std::polar(1.0, -(m - k) * theta_rad);
  }
  return DensityOperator(std::move(out));
}

double fidelity(const FockState& psi, const DensityOperator& rho) {
  if (psi.dim() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const double f = psi.amps().dot(rho.mat() * psi.amps()).real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityOperator& a, const DensityOperator& b) {
  const int dim = std::max(a.dim(), b.dim());
  const CMatrix sa = hermitian_sqrt(a.resized(dim).mat());
  const CMatrix inner = sa * b.resized(dim).mat() * sa;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root * root, 0.0, 1.0);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  const int dim = std::max(a.dim(), b.dim());
  const CMatrix diff = a.resized(dim).mat() - b.resized(dim).mat();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace gpslab
