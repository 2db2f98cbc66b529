#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gpslab/gps.hpp"
#include "gpslab/homodyne.hpp"
#include "gpslab/tomography.hpp"
#include "oracles.hpp"

using namespace gpslab;

namespace {

const std::vector<double> kEdges = uniform_edges(-kDefaultBinRange, kDefaultBinRange, kDefaultBins);

HomodyneDataset dataset(std::vector<double> phases, std::vector<HomodyneRecord> records) {
  HomodyneDataset d;
  d.phases_deg = std::move(phases);
  d.records = std::move(records);
  return d;
}

bool nondecreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - 1e-9) return false;
  }
  return true;
}

MleResult reconstruct(const DensityOperator& truth, double eta_hd, double eta_povm, int dim, std::uint64_t seed) {
  const auto phases = reference_phases_deg();
  const HomodyneDataset d = sample(truth, phases, kReferenceSamplesPerPhase, eta_hd, seed);
  const PovmSet povm = build_povm(phases, kEdges, dim, eta_povm);
  return mle_reconstruct(bin(d, kEdges), povm, {2000, 1e-9, dim});
}

}  // namespace

TEST(Bin, RowsSumToSamplesPerPhase) {
  const auto phases = reference_phases_deg();
  const HomodyneDataset d = sample(DensityOperator::pure(analytic_target(3, 0.5, 40)), phases, 20000, 1.0, 1);
  const BinnedData b = bin(d, kEdges);
  ASSERT_EQ(b.counts.size(), 6u);
  EXPECT_EQ(b.bins(), kDefaultBins + 2);
  for (const auto& row : b.counts) {
    std::int64_t sum = 0;
    for (std::int64_t c : row) sum += c;
    EXPECT_EQ(sum, 20000);
  }
  EXPECT_EQ(b.total(), 120000);
}

TEST(Bin, EmptyDatasetGivesZeroCounts) {
  const BinnedData b = bin(dataset({0.0, 90.0}, {}), kEdges);
  for (const auto& row : b.counts) {
    for (std::int64_t c : row) EXPECT_EQ(c, 0);
  }
}

TEST(Bin, RightClosedEdgesAndOverflow) {
  const std::vector<double> edges{-1.0, 0.0, 1.0};
  const BinnedData b = bin(dataset({0.0}, {{0.0, 0.0}, {0.0, -1.0}, {0.0, 1.0000001}, {0.0, -7.5}, {0.0, 0.5}}), edges);
  // bins: (-inf,-1] (-1,0] (0,1] (1,inf)
  EXPECT_EQ(b.counts[0], (std::vector<std::int64_t>{2, 1, 1, 1}));
}

TEST(Bin, RejectsBadEdgesAndPhases) {
  const HomodyneDataset d = dataset({0.0}, {{0.0, 0.1}});
  EXPECT_THROW(bin(d, std::vector<double>{0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(bin(d, std::vector<double>{1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(bin(dataset({0.0}, {{45.0, 0.1}}), kEdges), std::invalid_argument);
}

TEST(Povm, SingleBinIsIdentity) {
  const std::vector<double> phases{0.0, 60.0};
  const PovmSet povm = build_povm(phases, {}, 30);
  ASSERT_EQ(povm.bins(), 1);
  EXPECT_LT((povm.element(1, 0) - CMatrix::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Povm, CompletenessOverDefaultBins) {
  const std::vector<double> phases{0.0, 30.0};
  const PovmSet povm = build_povm(phases, kEdges, 15);
  for (int t = 0; t < povm.phases(); ++t) {
    CMatrix sum = CMatrix::Zero(15, 15);
    for (int j = 0; j < povm.bins(); ++j) sum += povm.element(t, j);
    EXPECT_LT((sum - CMatrix::Identity(15, 15)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Povm, VacuumBinMassesMatchErf) {
  const std::vector<double> phases{0.0, 90.0};
  const PovmSet povm = build_povm(phases, kEdges, 10);
  const Eigen::MatrixXd p = povm.probabilities(DensityOperator::pure(FockState::vacuum(10)));
  for (int t = 0; t < 2; ++t) {
    for (int j = 0; j < povm.bins(); ++j) {
      const double lo = j == 0 ? -HUGE_VAL : kEdges[j - 1];
      const double hi = j == povm.bins() - 1 ? HUGE_VAL : kEdges[j];
      EXPECT_NEAR(p(t, j), oracle::vacuum_bin_mass(lo, hi), 1e-8);
    }
  }
}

TEST(Povm, PhaseFactor) {
  const std::vector<double> phases{0.0, 40.0};
  const PovmSet povm = build_povm(phases, kEdges, 6);
  const double theta = 40.0 * std::numbers::pi / 180.0;
  for (int j : {10, 60, 100}) {
    const Complex expected = std::polar(1.0, theta) * povm.element(0, j)(1, 0);
    EXPECT_LT(std::abs(povm.element(1, j)(1, 0) - expected), 1e-12);
  }
}

TEST(Povm, ElementsAreHermitianPsd) {
  const std::vector<double> phases{30.0};
  const PovmSet povm = build_povm(phases, kEdges, 12, 0.7);
  for (int j = 0; j < povm.bins(); j += 7) {
    const CMatrix e = povm.element(0, j);
    EXPECT_LT((e - e.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<CMatrix>(e).eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Povm, LossAwareEqualsLossyState) {
  const std::vector<double> phases{0.0, 90.0};
  const DensityOperator rho = DensityOperator::pure(analytic_target(3, 0.8, 15));
  const Eigen::MatrixXd a = build_povm(phases, kEdges, 15, 0.75).probabilities(rho);
  const Eigen::MatrixXd b = build_povm(phases, kEdges, 15, 1.0).probabilities(loss_channel(rho, 0.75));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Povm, RejectsLargeDimension) {
  const std::vector<double> phases{0.0};
  EXPECT_THROW(build_povm(phases, kEdges, 101), std::invalid_argument);
}

TEST(Mle, VacuumRoundTrip) {
  const MleResult r = reconstruct(DensityOperator::pure(FockState::vacuum(15)), 1.0, 1.0, 15, 17);
  EXPECT_GE(fidelity(FockState::vacuum(15), r.rho), 0.995);
  EXPECT_TRUE(nondecreasing(r.loglik_trace));
  EXPECT_FALSE(validate(r.rho).has_value());
}

TEST(Mle, LossyTargetRoundTrip) {
  const DensityOperator truth = DensityOperator::pure(analytic_target(3, 0.5, 40));
  const MleResult r = reconstruct(truth, 0.8, 1.0, 15, 23);
  EXPECT_GE(fidelity(loss_channel(truth, 0.8), r.rho), 0.98);
  EXPECT_TRUE(nondecreasing(r.loglik_trace));
  EXPECT_EQ(r.loglik_trace.size(), static_cast<std::size_t>(r.iterations) + 1);
  EXPECT_FALSE(validate(r.rho).has_value());
}

TEST(Mle, LossCompensatedReconstruction) {
  const DensityOperator truth = DensityOperator::pure(analytic_target(3, 0.5, 40));
  const MleResult r = reconstruct(truth, 0.8, 0.8, 15, 29);
  EXPECT_GE(fidelity(truth, r.rho), 0.95);
}

TEST(Mle, DimensionInsensitiveForLowSupport) {
  const DensityOperator truth = DensityOperator::pure(analytic_target(3, 0.5, 8));
  const MleResult a = reconstruct(truth, 1.0, 1.0, 15, 31);
  const MleResult b = reconstruct(truth, 1.0, 1.0, 20, 31);
  EXPECT_GE(fidelity(a.rho, b.rho), 0.999);
}

TEST(Mle, ExactFrequenciesAreAFixedPoint) {
  const auto phases = reference_phases_deg();
  const PovmSet povm = build_povm(phases, kEdges, 12);
  const DensityOperator star = loss_channel(DensityOperator::pure(analytic_target(3, 0.5, 12)), 0.9);
  const Eigen::MatrixXd freq = povm.probabilities(star) / static_cast<double>(phases.size());
  EXPECT_LT(trace_distance(rrhor_step(star, povm, freq), star), 1e-9);
}

TEST(Mle, RejectsEmptyAndMismatchedData) {
  const std::vector<double> phases{0.0};
  const PovmSet povm = build_povm(phases, kEdges, 15);
  EXPECT_THROW(mle_reconstruct(bin(dataset({0.0}, {}), kEdges), povm), std::invalid_argument);
  const BinnedData other = bin(dataset({0.0}, {{0.0, 0.1}}), std::vector<double>{0.0});
  EXPECT_THROW(mle_reconstruct(other, povm), std::invalid_argument);
  EXPECT_THROW(mle_reconstruct(bin(dataset({0.0}, {{0.0, 0.1}}), kEdges), povm, {10, 1e-9, 12}), std::invalid_argument);
}
