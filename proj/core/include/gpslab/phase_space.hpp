#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gpslab/fock.hpp"

// Phase-space views of Fock-basis states. Wigner functions use the
// normalisation int W dx dp = 1 (vacuum: exp(-x^2 - p^2) / pi). Quadrature
// angles follow x_theta = x cos(theta) + p sin(theta).

namespace gpslab {

struct Axis {
  double min = -7.0;
  double max = 7.0;
  int n = 281;

  double at(int i) const { return n == 1 ? min : min + (max - min) * i / (n - 1); }
  double step() const { return n == 1 ? 0.0 : (max - min) / (n - 1); }
  double span() const { return max - min; }
  std::vector<double> points() const;

  bool operator==(const Axis&) const = default;
};

struct GridSpec {
  Axis x;
  Axis p;
};

struct WignerGrid {
  Axis x_axis;
  Axis p_axis;
  Eigen::MatrixXd values;  // values(i, j) = W(x_i, p_j)
  bool span_warning = false;  // span below 4 natural units

  double cell_area() const { return x_axis.step() * p_axis.step(); }
  double integral() const { return values.sum() * cell_area(); }
};

double wigner_at(const DensityOperator& rho, double x, double p);
WignerGrid wigner(const DensityOperator& rho, const GridSpec& grid = {});

struct MarginalDistribution {
  double theta_deg = 0.0;
  Axis x_axis;
  std::vector<double> pdf;

  double mean() const;
  double variance() const;
};

// p(x; theta) = <x_theta| rho |x_theta>, clipped at zero and renormalised on
// the axis (trapezoid rule).
MarginalDistribution marginal(const DensityOperator& rho, double theta_deg, const Axis& x_axis);
// Unclipped density at a single point.
double marginal_density(const DensityOperator& rho, double theta_deg, double x);

struct NegativityMetrics {
  double min_value = 0.0;
  double negative_volume = 0.0;
  int dip_count = 0;
};

inline constexpr double kDipThreshold = 1e-3;
// Quadrature angle of the interference-fringe axis of Psi_{n,s0}(x).
inline constexpr double kFringeAxisDeg = 0.0;

// Values along the line through the origin at angle cut_theta_deg, sampled
// with the finer grid step by bilinear interpolation.
std::vector<double> wigner_cut(const WignerGrid& w, double cut_theta_deg);
NegativityMetrics negativity_metrics(const WignerGrid& w, double cut_theta_deg,
                                     double threshold = kDipThreshold);

// Phase-resolved visibility: total-variation distance between p(x; theta) and
// the phase-averaged marginal. Zero for any Fock-diagonal state.
double fringe_contrast(const DensityOperator& rho, double theta_deg, const Axis& x_axis);

}  // namespace gpslab
