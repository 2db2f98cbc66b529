#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "gpslab/gps.hpp"
#include "gpslab/quadrature.hpp"

namespace gpslab {

namespace {

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr make_vector(std::initializer_list<double> values) {
  VectorPtr v(gsl_vector_alloc(values.size()));
  std::size_t i = 0;
  for (double x : values) gsl_vector_set(v.get(), i++, x);
  return v;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
  return g;
}

struct FitProblem {
  const DensityOperator* rho;
  int n;
  bool fixed_s0;  // n <= 1: only (1 + s0) lambda^2 is identifiable

  double infidelity(double s0, double lambda) const {
    return 1.0 - fidelity(scaled_target(n, s0, lambda, rho->dim()), *rho);
  }
};

// Parameters: (|s0|, log lambda), or just log lambda when s0 is pinned to 0.
double objective(const gsl_vector* v, void* params) {
  const auto& p = *static_cast<const FitProblem*>(params);
  if (p.fixed_s0) return p.infidelity(0.0, std::exp(gsl_vector_get(v, 0)));
  return p.infidelity(std::abs(gsl_vector_get(v, 0)), std::exp(gsl_vector_get(v, 1)));
}

}  // namespace

FockState scaled_target(int n, double s0, double lambda, int dim) {
  if (dim < 1) throw std::invalid_argument("truncation dimension must be >= 1");
  if (n < 0 || n > kMaxHermiteOrder) throw std::domain_error("Fock order outside [0, 200]");
  if (!std::isfinite(s0) || s0 < 0.0) throw std::domain_error("s0 must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda <= 0.0) throw std::domain_error("lambda must be > 0");

  // c_k = int phi_k(x) H_n(lambda x) exp(-(1+s0) lambda^2 x^2 / 2) dx.
  // With phi_k(x) = h_k(x) exp(-x^2/2) the integrand is polynomial times
  // exp(-a x^2), a = (1 + (1+s0) lambda^2)/2, so Gauss-Hermite is exact.
  const double a = 0.5 * (1.0 + (1.0 + s0) * lambda * lambda);
  const double scale = 1.0 / std::sqrt(a);
  const QuadratureRule gh = gauss_hermite(std::min(2 * kMaxHermiteOrder, (dim + n) / 2 + 16));
  CVector c = CVector::Zero(dim);
  std::vector<double> h(static_cast<std::size_t>(dim));
  for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
    const double x = gh.nodes[q] * scale;
    // h_k = phi_k(x) exp(x^2/2), same normalised recurrence without the Gaussian.
    h[0] = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
    if (dim > 1) h[1] = std::sqrt(2.0) * x * h[0];
    for (int k = 1; k + 1 < dim; ++k) {
      h[k + 1] = std::sqrt(2.0 / (k + 1.0)) * x * h[k] - std::sqrt(k / (k + 1.0)) * h[k - 1];
    }
    const double f = gh.weights[q] * scale * hermite(n, lambda * x);
    for (int k = n % 2; k < dim; k += 2) c[k] += f * h[k];
  }
  return FockState(std::move(c)).normalized();
}

S0Fit extract_s0(const DensityOperator& rho, int n, const FitOptions& opts) {
  if (n < 0 || n >= rho.dim()) throw std::invalid_argument("herald count outside truncation");
  double parity_weight = 0.0;
  for (int k = n % 2; k < rho.dim(); k += 2) parity_weight += rho(k, k).real();
  if (parity_weight < 0.5 * rho.trace()) {
    throw std::invalid_argument("state parity does not match the herald count");
  }

  FitProblem problem{&rho, n, n <= 1};
  std::vector<double> s0_grid{0.0};
  if (!problem.fixed_s0) {
    const std::vector<double> g = log_grid(opts.s0_min, opts.s0_max, opts.s0_points);
    s0_grid.insert(s0_grid.end(), g.begin(), g.end());
  }
  const std::vector<double> lambda_grid = log_grid(opts.lambda_min, opts.lambda_max, opts.lambda_points);

  // Ascending s0 with strict improvement keeps the smaller s0 on ties.
  S0Fit best;
  double best_loss = 2.0;
  for (double s0 : s0_grid) {
    for (double lambda : lambda_grid) {
      const double loss = problem.infidelity(s0, lambda);
      if (loss < best_loss) {
        best_loss = loss;
        best.s0 = s0;
        best.lambda = lambda;
      }
    }
  }

  const std::size_t dims = problem.fixed_s0 ? 1 : 2;
  gsl_multimin_function fn{&objective, dims, &problem};
  VectorPtr start = problem.fixed_s0 ? make_vector({std::log(best.lambda)})
                                     : make_vector({best.s0, std::log(best.lambda)});
  VectorPtr step = problem.fixed_s0 ? make_vector({0.05})
                                    : make_vector({0.1 * std::max(best.s0, 0.05), 0.05});
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dims));
  gsl_multimin_fminimizer_set(minimizer.get(), &fn, start.get(), step.get());
  for (int iter = 0; iter < opts.max_simplex_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(minimizer.get());
    if (gsl_multimin_test_size(size, opts.simplex_tolerance) == GSL_SUCCESS) break;
  }
  if (minimizer->fval < best_loss) {
    best_loss = minimizer->fval;
    if (problem.fixed_s0) {
      best.lambda = std::exp(gsl_vector_get(minimizer->x, 0));
    } else {
      best.s0 = std::abs(gsl_vector_get(minimizer->x, 0));
      best.lambda = std::exp(gsl_vector_get(minimizer->x, 1));
    }
  }
  best.fidelity = std::clamp(1.0 - best_loss, 0.0, 1.0);
  best.model_mismatch = best.fidelity < opts.mismatch_threshold;
  return best;
}

S0Fit extract_s0(const FockState& psi, int n, const FitOptions& opts) {
  return extract_s0(DensityOperator::pure(psi.normalized()), n, opts);
}

}  // namespace gpslab
