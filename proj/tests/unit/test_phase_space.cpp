#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gpslab/gps.hpp"
#include "gpslab/phase_space.hpp"

using namespace gpslab;

namespace {

constexpr double kPi = std::numbers::pi;

DensityOperator fock(int n, int dim = 20) { return DensityOperator::pure(FockState::basis(n, dim)); }

DensityOperator coherent(Complex alpha, int dim) {
  CVector c(dim);
  for (int n = 0; n < dim; ++n) {
    c[n] = std::exp(-0.5 * std::norm(alpha) - 0.5 * std::lgamma(n + 1.0)) * std::pow(alpha, n);
  }
  return DensityOperator::pure(FockState(c).normalized());
}

const GridSpec kWide{{-8.0, 8.0, 201}, {-8.0, 8.0, 201}};

}  // namespace

TEST(Wigner, Vacuum) {
  const DensityOperator vac = fock(0);
  EXPECT_NEAR(wigner_at(vac, 0.0, 0.0), 1.0 / kPi, 1e-10);
  for (auto [x, p] : {std::pair{0.5, -0.3}, {1.2, 0.7}, {-2.0, 1.0}}) {
    EXPECT_NEAR(wigner_at(vac, x, p), std::exp(-x * x - p * p) / kPi, 1e-12);
  }
}

TEST(Wigner, FockOrigin) {
  for (int n = 0; n <= 5; ++n) EXPECT_NEAR(wigner_at(fock(n), 0.0, 0.0), (n % 2 ? -1.0 : 1.0) / kPi, 1e-12);
}

TEST(Wigner, SinglePhotonClosedForm) {
  // W_1 = (2 (x^2 + p^2) - 1) exp(-x^2 - p^2) / pi
  for (auto [x, p] : {std::pair{0.3, 0.4}, {1.5, -0.2}}) {
    const double r2 = x * x + p * p;
    EXPECT_NEAR(wigner_at(fock(1), x, p), (2 * r2 - 1) * std::exp(-r2) / kPi, 1e-12);
  }
}

TEST(Wigner, CoherentIsDisplacedGaussian) {
  const Complex alpha(0.8, -0.5);
  const double x0 = std::sqrt(2.0) * alpha.real();
  const double p0 = std::sqrt(2.0) * alpha.imag();
  const DensityOperator rho = coherent(alpha, 30);
  for (auto [x, p] : {std::pair{0.0, 0.0}, {x0, p0}, {1.0, 1.0}}) {
    EXPECT_NEAR(wigner_at(rho, x, p), std::exp(-(x - x0) * (x - x0) - (p - p0) * (p - p0)) / kPi, 1e-10);
  }
}

TEST(Wigner, GridNormalisation) {
  for (const DensityOperator& rho : {fock(3), DensityOperator::pure(analytic_target(3, 1.2, 40))}) {
    const WignerGrid w = wigner(rho, kWide);
    EXPECT_NEAR(w.integral(), 1.0, 1e-4);
    EXPECT_FALSE(w.span_warning);
  }
  EXPECT_TRUE(wigner(fock(0), GridSpec{{-1.0, 1.0, 11}, {-1.0, 1.0, 11}}).span_warning);
}

TEST(Wigner, GridMatchesPointwise) {
  const DensityOperator rho = DensityOperator::pure(analytic_target(3, 0.5, 40));
  const WignerGrid w = wigner(rho, GridSpec{{-3.0, 3.0, 7}, {-2.0, 2.0, 5}});
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(w.values(i, j), wigner_at(rho, w.x_axis.at(i), w.p_axis.at(j)));
  }
}

TEST(Wigner, RotationalCovarianceOfFockDiagonal) {
  CMatrix m = CMatrix::Zero(10, 10);
  m(0, 0) = 0.2;
  m(2, 2) = 0.5;
  m(5, 5) = 0.3;
  const DensityOperator rho(m);
  for (double angle : {0.3, 1.1, 2.7}) {
    for (auto [x, p] : {std::pair{0.9, 0.1}, {-1.4, 0.6}}) {
      const double xr = x * std::cos(angle) - p * std::sin(angle);
      const double pr = x * std::sin(angle) + p * std::cos(angle);
      EXPECT_NEAR(wigner_at(rho, x, p), wigner_at(rho, xr, pr), 1e-8);
    }
  }
}

TEST(Marginal, VacuumGaussian) {
  for (double theta : {0.0, 45.0, 120.0}) {
    const MarginalDistribution m = marginal(fock(0), theta, Axis{-8.0, 8.0, 1601});
    EXPECT_NEAR(m.variance(), 0.5, 1e-8);
    EXPECT_NEAR(m.mean(), 0.0, 1e-12);
  }
}

TEST(Marginal, FockIsPhaseInsensitive) {
  const DensityOperator rho = fock(3);
  const Axis ax{-7.0, 7.0, 141};
  const MarginalDistribution ref = marginal(rho, 0.0, ax);
  for (double theta : {30.0, 90.0, 150.0}) {
    const MarginalDistribution m = marginal(rho, theta, ax);
    for (std::size_t i = 0; i < m.pdf.size(); ++i) EXPECT_NEAR(m.pdf[i], ref.pdf[i], 1e-12);
  }
}

TEST(Marginal, NonNegativeAndNormalised) {
  const MarginalDistribution m = marginal(herald_realistic(reference_config(0.3), 3).state, 60.0, Axis{-7, 7, 701});
  double sum = 0.0;
  for (std::size_t i = 0; i < m.pdf.size(); ++i) {
    EXPECT_GE(m.pdf[i], 0.0);
    sum += (i == 0 || i + 1 == m.pdf.size() ? 0.5 : 1.0) * m.pdf[i];
  }
  EXPECT_NEAR(sum * m.x_axis.step(), 1.0, 1e-6);
}

TEST(Marginal, EqualsRotatedMarginal) {
  const DensityOperator rho = DensityOperator::pure(squeezed_vacuum(0.4, 30, 0.5).state);
  for (double theta : {25.0, 100.0}) {
    for (double x : {-1.3, 0.0, 0.8}) {
      EXPECT_NEAR(marginal_density(rho, theta, x),
                  marginal_density(rotate(rho, theta * kPi / 180.0), 0.0, x), 1e-10);
    }
  }
}

TEST(Marginal, IsWignerProjection) {
  const DensityOperator rho = DensityOperator::pure(analytic_target(3, 1.2, 40));
  const Axis p{-8.0, 8.0, 321};
  for (double x : {-1.7, -0.4, 0.9, 2.2}) {
    double sum = 0.0;
    for (int j = 0; j < p.n; ++j) sum += (j == 0 || j == p.n - 1 ? 0.5 : 1.0) * wigner_at(rho, x, p.at(j));
    EXPECT_NEAR(sum * p.step(), marginal_density(rho, 0.0, x), 1e-4) << "x = " << x;
  }
}

TEST(Marginal, SqueezedAxis) {
  // Squeezing along 90 degrees rotates the narrow quadrature to x_90 = p.
  const DensityOperator rho = DensityOperator::pure(squeezed_vacuum(0.4, 40, kPi / 2).state);
  EXPECT_NEAR(marginal(rho, 90.0, Axis{-8, 8, 3201}).variance(), std::exp(-0.8) / 2, 1e-4);
}

TEST(Negativity, Vacuum) {
  const NegativityMetrics m = negativity_metrics(wigner(fock(0), kWide), 0.0);
  EXPECT_NEAR(m.min_value, 0.0, 1e-10);
  EXPECT_EQ(m.negative_volume, 0.0);
  EXPECT_EQ(m.dip_count, 0);
}

TEST(Negativity, GaussianStatesHaveNone) {
  for (const DensityOperator& rho : {coherent({1.0, 0.5}, 30), DensityOperator::pure(squeezed_vacuum(0.5, 40).state)}) {
    const NegativityMetrics m = negativity_metrics(wigner(rho, kWide), 0.0);
    EXPECT_LT(m.negative_volume, 1e-6);  // truncation ripple only
    EXPECT_EQ(m.dip_count, 0);
  }
}

TEST(Negativity, FockThreeHasThreeDipsOnAnyCut) {
  const WignerGrid w = wigner(fock(3), kWide);
  for (double cut : {0.0, 30.0, 90.0, 135.0}) {
    const NegativityMetrics m = negativity_metrics(w, cut);
    EXPECT_EQ(m.dip_count, 3) << "cut = " << cut;
    EXPECT_NEAR(m.min_value, -1.0 / kPi, 1e-6);
    EXPECT_GT(m.negative_volume, 0.0);
  }
}

TEST(Negativity, TargetFamilyThreeDipsOnFringeAxis) {
  for (double s0 : {0.11, 0.5, 1.2}) {
    const WignerGrid w = wigner(DensityOperator::pure(analytic_target(3, s0, 40)), kWide);
    EXPECT_EQ(negativity_metrics(w, kFringeAxisDeg).dip_count, 3) << "s0 = " << s0;
  }
}

TEST(FringeContrast, ZeroForFockDiagonal) {
  EXPECT_NEAR(fringe_contrast(fock(3), 0.0, Axis{-8, 8, 801}), 0.0, 1e-12);
}

TEST(FringeContrast, GrowsWithS0) {
  double previous = -1.0;
  for (double s0 : {0.11, 0.5, 1.2}) {
    const double c = fringe_contrast(DensityOperator::pure(analytic_target(3, s0, 40)), 90.0, Axis{-8, 8, 801});
    EXPECT_GT(c, previous) << "s0 = " << s0;
    previous = c;
  }
}
