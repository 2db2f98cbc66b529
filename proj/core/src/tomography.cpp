#include "gpslab/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gpslab/quadrature.hpp"

namespace gpslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kNodesPerPanel = 32;
constexpr double kPanelWidth = 0.5;
constexpr double kCompletenessTolerance = 1e-6;

// No edges means a single bin covering the whole line.
void require_edges(std::span<const double> edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i])) throw std::invalid_argument("bin edges must be finite");
    if (i > 0 && !(edges[i] > edges[i - 1])) throw std::invalid_argument("bin edges must be strictly increasing");
  }
}

std::size_t phase_index(std::span<const double> phases, double theta) {
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (std::abs(phases[i] - theta) < 1e-9) return i;
  }
  std::ostringstream msg;
  msg << "record phase " << theta << " is not in the configured phase list";
  throw std::invalid_argument(msg.str());
}

// Adds w * phi phi^T over the rule into g.
void accumulate(Eigen::MatrixXd& g, const QuadratureRule& rule) {
  const int dim = static_cast<int>(g.rows());
  Eigen::VectorXd phi(dim);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    fock_wavefunctions(rule.nodes[q], std::span<double>(phi.data(), dim));
    g.noalias() += rule.weights[q] * (phi * phi.transpose());
  }
}

// R = sum_theta U_theta (sum_j f/p G_j) U_theta^dag.
CMatrix r_operator(const PovmSet& povm, const Eigen::MatrixXd& freq, const Eigen::MatrixXd& prob) {
  const int dim = povm.dim();
  CMatrix r = CMatrix::Zero(dim, dim);
  Eigen::MatrixXd a(dim, dim);
  for (int t = 0; t < povm.phases(); ++t) {
    a.setZero();
    for (int j = 0; j < povm.bins(); ++j) {
      if (freq(t, j) == 0.0) continue;
      a.noalias() += (freq(t, j) / std::max(prob(t, j), kProbabilityFloor)) * povm.bin_operator(j);
    }
    const double theta = povm.phases_deg()[t] * kDeg;
    for (int m = 0; m < dim; ++m) {
      for (int k = 0; k < dim; ++k) r(m, k) += std::polar(a(m, k), (m - k) * theta);
    }
  }
  return r;
}

DensityOperator sandwich(const CMatrix& m, const DensityOperator& rho) {
  const CMatrix out = m * rho.mat() * m.adjoint();
  return DensityOperator(0.5 * (out + out.adjoint())).normalized();
}

double mean_log_likelihood(const Eigen::MatrixXd& freq, const Eigen::MatrixXd& prob) {
  double ll = 0.0;
  for (int t = 0; t < freq.rows(); ++t) {
    for (int j = 0; j < freq.cols(); ++j) {
      if (freq(t, j) > 0.0) ll += freq(t, j) * std::log(std::max(prob(t, j), kProbabilityFloor));
    }
  }
  return ll;
}

}  // namespace

std::int64_t BinnedData::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) sum += c;
  }
  return sum;
}

std::vector<double> uniform_edges(double lo, double hi, int count) {
  if (count < 1 || !(hi > lo)) throw std::invalid_argument("need count >= 1 and hi > lo");
  std::vector<double> e(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) e[i] = lo + (hi - lo) * i / count;
  return e;
}

BinnedData bin(const HomodyneDataset& data, std::span<const double> edges) {
  require_edges(edges);
  BinnedData out{data.phases_deg, {edges.begin(), edges.end()}, {}};
  out.counts.assign(data.phases_deg.size(), std::vector<std::int64_t>(edges.size() + 1, 0));
  for (const HomodyneRecord& rec : data.records) {
    const std::size_t t = phase_index(data.phases_deg, rec.theta_deg);
    // First edge >= x: x in (e_{j-1}, e_j] lands in bin j.
    const auto j = std::lower_bound(edges.begin(), edges.end(), rec.x) - edges.begin();
    ++out.counts[t][static_cast<std::size_t>(j)];
  }
  return out;
}

PovmSet::PovmSet(std::vector<double> phases_deg, std::vector<double> edges, double eta,
                 std::vector<Eigen::MatrixXd> bin_operators)
    : phases_deg_(std::move(phases_deg)), edges_(std::move(edges)), eta_(eta), bin_ops_(std::move(bin_operators)) {
  if (bin_ops_.empty() || phases_deg_.empty()) throw std::invalid_argument("empty POVM set");
  if (bin_ops_.size() != edges_.size() + 1) throw std::invalid_argument("bin operator count != edges + 1");
}

CMatrix PovmSet::element(int phase, int bin) const {
  const double theta = phases_deg_.at(phase) * kDeg;
  const Eigen::MatrixXd& g = bin_ops_.at(bin);
  CMatrix out(dim(), dim());
  for (int m = 0; m < dim(); ++m) {
    for (int k = 0; k < dim(); ++k) out(m, k) = std::polar(g(m, k), (m - k) * theta);
  }
  return out;
}

Eigen::MatrixXd PovmSet::probabilities(const DensityOperator& rho) const {
  if (rho.dim() != dim()) throw std::invalid_argument("state and POVM dimensions differ");
  Eigen::MatrixXd prob(phases(), bins());
  for (int t = 0; t < phases(); ++t) {
    // Tr[rho U G U^dag] = sum_{mk} Re(rho_km e^{i(m-k)theta}) G_mk.
    const Eigen::MatrixXd rotated = rotate(rho, phases_deg_[t] * kDeg).mat().real();
    for (int j = 0; j < bins(); ++j) prob(t, j) = rotated.cwiseProduct(bin_ops_[j]).sum();
  }
  return prob;
}

PovmSet build_povm(std::span<const double> phases_deg, std::span<const double> edges, int dim, double eta) {
  require_edges(edges);
  if (dim < 1 || dim > 100) throw std::invalid_argument("POVM dimension must lie in [1, 100]");
  if (phases_deg.empty()) throw std::invalid_argument("no measurement phases");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("efficiency must lie in [0, 1]");

  // phi_m with m < dim is below 1e-20 beyond the turning point plus 10.
  double reach = std::sqrt(2.0 * dim + 1.0) + 10.0;
  if (!edges.empty()) reach = std::max({reach, std::abs(edges.front()) + 1.0, std::abs(edges.back()) + 1.0});
  std::vector<Eigen::MatrixXd> ops;
  ops.reserve(edges.size() + 1);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t j = 0; j <= edges.size(); ++j) {
    const double lo = j == 0 ? -reach : edges[j - 1];
    const double hi = j == edges.size() ? reach : edges[j];
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    accumulate(g, composite_legendre(lo, hi, kNodesPerPanel, kPanelWidth));
    sum += g;
    if (eta < 1.0) g = loss_channel_adjoint(g.cast<Complex>(), eta).real();
    ops.push_back(std::move(g));
  }
  const double err = (sum - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (err > kCompletenessTolerance) {
    std::ostringstream msg;
    msg << "POVM completeness violated by " << err;
    throw std::runtime_error(msg.str());
  }
  return PovmSet({phases_deg.begin(), phases_deg.end()}, {edges.begin(), edges.end()}, eta, std::move(ops));
}

Eigen::MatrixXd frequencies(const BinnedData& data) {
  const std::int64_t total = data.total();
  if (total <= 0) throw std::invalid_argument("binned data set is empty");
  Eigen::MatrixXd f(static_cast<int>(data.counts.size()), data.bins());
  for (std::size_t t = 0; t < data.counts.size(); ++t) {
    for (int j = 0; j < data.bins(); ++j) f(static_cast<int>(t), j) = static_cast<double>(data.counts[t][j]) / total;
  }
  return f;
}

double log_likelihood(const DensityOperator& rho, const PovmSet& povm, const Eigen::MatrixXd& freq) {
  return mean_log_likelihood(freq, povm.probabilities(rho));
}

DensityOperator rrhor_step(const DensityOperator& rho, const PovmSet& povm, const Eigen::MatrixXd& freq) {
  const CMatrix r = r_operator(povm, freq, povm.probabilities(rho));
  return sandwich(r, rho);
}

MleResult mle_reconstruct(const BinnedData& data, const PovmSet& povm, const MleOptions& opts) {
  if (opts.dim != povm.dim()) throw std::invalid_argument("MLE dimension differs from POVM dimension");
  if (data.phases_deg.size() != static_cast<std::size_t>(povm.phases()) || data.bins() != povm.bins()) {
    throw std::invalid_argument("binned data layout differs from POVM layout");
  }
  const Eigen::MatrixXd freq = frequencies(data);
  const int dim = povm.dim();
  const CMatrix identity = CMatrix::Identity(dim, dim);

  MleResult result{DensityOperator::maximally_mixed(dim), {}, 0, false, 0};
  Eigen::MatrixXd prob = povm.probabilities(result.rho);
  double ll = mean_log_likelihood(freq, prob);
  result.loglik_trace.push_back(ll);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const CMatrix r = r_operator(povm, freq, prob);
    DensityOperator next = sandwich(r, result.rho);
    Eigen::MatrixXd next_prob = povm.probabilities(next);
    double next_ll = mean_log_likelihood(freq, next_prob);
    if (next_ll < ll) {
      ++result.diluted_steps;
      for (double eps = 0.5; eps > 1e-12; eps *= 0.5) {
        next = sandwich(identity + eps * r, result.rho);
        next_prob = povm.probabilities(next);
        next_ll = mean_log_likelihood(freq, next_prob);
        if (next_ll >= ll) break;
      }
      if (next_ll < ll) {  // no ascent direction left at double precision
        next = result.rho;
        next_prob = prob;
        next_ll = ll;
      }
    }
    if (!std::isfinite(next_ll)) {
      std::ostringstream msg;
      msg << "non-finite log-likelihood at iteration " << iter;
      throw NumericalError(msg.str());
    }
    const double step = trace_distance(next, result.rho);
    result.rho = std::move(next);
    prob = std::move(next_prob);
    ll = next_ll;
    result.loglik_trace.push_back(ll);
    result.iterations = iter;
    if (step < opts.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace gpslab
