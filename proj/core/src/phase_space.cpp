#include "gpslab/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void require_axis(const Axis& a) {
  if (a.n < 2 || !(a.max > a.min)) throw std::invalid_argument("axis needs n >= 2 and max > min");
}

double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

// Evaluates sum_{m,k} rho_mk W_{|m><k|}(x, p) with
//   W_{|n+d><n|} = (-1)^n / pi * l_n^d(z) * exp(-i d phi),  z = 2 (x^2 + p^2),
// where l_n^d(z) = sqrt(n!/(n+d)!) z^{d/2} e^{-z/2} L_n^{(d)}(z) obeys
//   l_{n+1} = [(2n+1+d-z) l_n - sqrt(n (n+d)) l_{n-1}] / sqrt((n+1)(n+d+1)).
class WignerKernel {
 public:
  explicit WignerKernel(const DensityOperator& rho) : rho_(rho.mat()), dim_(rho.dim()) {
    half_log_factorial_.resize(static_cast<std::size_t>(dim_));
    for (int d = 0; d < dim_; ++d) half_log_factorial_[d] = 0.5 * std::lgamma(d + 1.0);
  }

  double operator()(double x, double p) const {
    const double z = 2.0 * (x * x + p * p);
    const double phi = std::atan2(p, x);
    const double log_z = z > 0.0 ? std::log(z) : 0.0;
    double total = 0.0;
    for (int d = 0; d < dim_; ++d) {
      double l_prev = 0.0;
      double l_cur;
      if (d == 0) {
        l_cur = std::exp(-0.5 * z);
      } else if (z == 0.0) {
        break;  // every d > 0 term vanishes at the origin
      } else {
        l_cur = std::exp(0.5 * d * log_z - half_log_factorial_[d] - 0.5 * z);
      }
      const Complex phase = std::polar(1.0, -d * phi);
      double acc = 0.0;
      for (int n = 0; n + d < dim_; ++n) {
        const double coeff = (rho_(n + d, n) * phase).real();
        acc += (n % 2 == 0 ? coeff : -coeff) * l_cur;
        const double l_next = ((2.0 * n + 1.0 + d - z) * l_cur - std::sqrt(n * (n + d + 0.0)) * l_prev) /
                              std::sqrt((n + 1.0) * (n + d + 1.0));
        l_prev = l_cur;
        l_cur = l_next;
      }
      total += (d == 0 ? acc : 2.0 * acc);
    }
    return total / std::numbers::pi;
  }

 private:
  const CMatrix& rho_;
  int dim_;
  std::vector<double> half_log_factorial_;
};

double bilinear(const WignerGrid& w, double x, double p) {
  const auto locate = [](const Axis& a, double v, int& i, double& frac) {
    const double u = (v - a.min) / a.step();
    i = std::clamp(static_cast<int>(std::floor(u)), 0, a.n - 2);
    frac = std::clamp(u - i, 0.0, 1.0);
  };
  int i = 0;
  int j = 0;
  double fx = 0.0;
  double fp = 0.0;
  locate(w.x_axis, x, i, fx);
  locate(w.p_axis, p, j, fp);
  const auto& v = w.values;
  return (1 - fx) * (1 - fp) * v(i, j) + fx * (1 - fp) * v(i + 1, j) + (1 - fx) * fp * v(i, j + 1) +
         fx * fp * v(i + 1, j + 1);
}

}  // namespace

std::vector<double> Axis::points() const {
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts[i] = at(i);
  return pts;
}

double wigner_at(const DensityOperator& rho, double x, double p) { return WignerKernel(rho)(x, p); }

WignerGrid wigner(const DensityOperator& rho, const GridSpec& grid) {
  require_axis(grid.x);
  require_axis(grid.p);
  WignerGrid out{grid.x, grid.p, Eigen::MatrixXd(grid.x.n, grid.p.n), false};
  out.span_warning = grid.x.span() < 4.0 || grid.p.span() < 4.0;
  const WignerKernel kernel(rho);
  for (int i = 0; i < grid.x.n; ++i) {
    const double x = grid.x.at(i);
    for (int j = 0; j < grid.p.n; ++j) out.values(i, j) = kernel(x, grid.p.at(j));
  }
  return out;
}

double marginal_density(const DensityOperator& rho, double theta_deg, double x) {
  const int dim = rho.dim();
  std::vector<double> phi(static_cast<std::size_t>(dim));
  fock_wavefunctions(x, phi);
  // <m|x_theta> = exp(i m theta) phi_m(x).
  CVector ket(dim);
  for (int m = 0; m < dim; ++m) ket[m] = std::polar(phi[m], m * theta_deg * kDeg);
  return ket.dot(rho.mat() * ket).real();
}

MarginalDistribution marginal(const DensityOperator& rho, double theta_deg, const Axis& x_axis) {
  require_axis(x_axis);
  MarginalDistribution out{theta_deg, x_axis, std::vector<double>(static_cast<std::size_t>(x_axis.n))};
  for (int i = 0; i < x_axis.n; ++i) {
    out.pdf[i] = std::max(0.0, marginal_density(rho, theta_deg, x_axis.at(i)));
  }
  const double mass = trapezoid(out.pdf, x_axis.step());
  if (!(mass > 0.0)) throw std::domain_error("marginal has no mass on the requested axis");
  for (double& v : out.pdf) v /= mass;
  return out;
}

double MarginalDistribution::mean() const {
  std::vector<double> f(pdf.size());
  for (std::size_t i = 0; i < pdf.size(); ++i) f[i] = x_axis.at(static_cast<int>(i)) * pdf[i];
  return trapezoid(f, x_axis.step());
}

double MarginalDistribution::variance() const {
  const double mu = mean();
  std::vector<double> f(pdf.size());
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const double dx = x_axis.at(static_cast<int>(i)) - mu;
    f[i] = dx * dx * pdf[i];
  }
  return trapezoid(f, x_axis.step());
}

std::vector<double> wigner_cut(const WignerGrid& w, double cut_theta_deg) {
  const double c = std::cos(cut_theta_deg * kDeg);
  const double s = std::sin(cut_theta_deg * kDeg);
  double t_lo = -1e300;
  double t_hi = 1e300;
  const auto clip = [&](double dir, const Axis& a) {
    if (std::abs(dir) < 1e-12) return;
    const double lo = a.min / dir;
    const double hi = a.max / dir;
    t_lo = std::max(t_lo, std::min(lo, hi));
    t_hi = std::min(t_hi, std::max(lo, hi));
  };
  clip(c, w.x_axis);
  clip(s, w.p_axis);
  const double h = std::min(w.x_axis.step(), w.p_axis.step());
  std::vector<double> cut;
  for (long k = static_cast<long>(std::ceil(t_lo / h - 1e-9)); k * h <= t_hi + 1e-9 * h; ++k) {
    const double t = k * h;
    cut.push_back(bilinear(w, t * c, t * s));
  }
  return cut;
}

NegativityMetrics negativity_metrics(const WignerGrid& w, double cut_theta_deg, double threshold) {
  NegativityMetrics m;
  m.min_value = w.values.minCoeff();
  m.negative_volume = (-w.values.array()).max(0.0).sum() * w.cell_area();
  const std::vector<double> cut = wigner_cut(w, cut_theta_deg);
  for (std::size_t i = 1; i + 1 < cut.size(); ++i) {
    if (cut[i] < -threshold && cut[i] < cut[i - 1] && cut[i] < cut[i + 1]) ++m.dip_count;
  }
  return m;
}

double fringe_contrast(const DensityOperator& rho, double theta_deg, const Axis& x_axis) {
  const DensityOperator dephased(rho.mat().diagonal().asDiagonal().toDenseMatrix());
  const MarginalDistribution resolved = marginal(rho, theta_deg, x_axis);
  const MarginalDistribution averaged = marginal(dephased, theta_deg, x_axis);
  std::vector<double> diff(resolved.pdf.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(resolved.pdf[i] - averaged.pdf[i]);
  return 0.5 * trapezoid(diff, x_axis.step());
}

}  // namespace gpslab
