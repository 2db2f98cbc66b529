#include "gpslab/gps.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gpslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double squeezing_from_gain(double gain) { return 0.5 * std::log(gain); }

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << field << ": " << what;
    throw std::invalid_argument(msg.str());
  }
}

double dark_click_probability(const Detector& d, double window_s) {
  return -std::expm1(-d.dark_rate_cps * window_s);
}

}  // namespace

std::vector<Detector> reference_detector_bank() {
  return {{0.75, 40.0}, {0.67, 97.0}, {0.75, 26.0}, {0.62, 32.0}};
}

double GpsConfig::r1() const { return squeezing_from_gain(gain1); }
double GpsConfig::r2() const { return squeezing_from_gain(gain2); }

void GpsConfig::validate() const {
  require(std::isfinite(gain1) && gain1 >= 1.0, "gain1", "must be a finite gain >= 1");
  require(std::isfinite(gain2) && gain2 >= 1.0, "gain2", "must be a finite gain >= 1");
  require(std::abs(r1()) <= 3.0, "gain1", "squeezing above r = 3 is not supported");
  require(std::abs(r2()) <= 3.0, "gain2", "squeezing above r = 3 is not supported");
  require(std::isfinite(relative_phase_deg), "relative_phase", "must be finite");
  require(reflectivity >= 0.0 && reflectivity <= 1.0, "reflectivity", "must lie in [0, 1]");
  require(dim >= 2 && dim <= kMaxHermiteOrder, "dim", "must lie in [2, 200]");
  require(herald_n >= 0 && herald_n < dim, "herald_n", "must lie in [0, dim)");
  require(idler_efficiency >= 0.0 && idler_efficiency <= 1.0, "idler_efficiency", "must lie in [0, 1]");
  require(!detector_bank.empty() && detector_bank.size() <= 16, "detector_bank", "needs 1 to 16 detectors");
  for (const Detector& d : detector_bank) {
    require(d.efficiency >= 0.0 && d.efficiency <= 1.0, "detector_bank", "efficiency must lie in [0, 1]");
    require(std::isfinite(d.dark_rate_cps) && d.dark_rate_cps >= 0.0, "detector_bank",
            "dark_rate_cps must be >= 0");
  }
  require(std::isfinite(window_s) && window_s >= 0.0, "window", "must be >= 0");
  require(std::isfinite(mode_rate_hz) && mode_rate_hz >= 0.0, "mode_rate", "must be >= 0");
}

GpsConfig reference_config(double reflectivity) {
  GpsConfig cfg;
  cfg.reflectivity = reflectivity;
  return cfg;
}

TwoModeInput build_input(const GpsConfig& cfg) {
  cfg.validate();
  const SqueezedVacuum first = squeezed_vacuum(cfg.r1(), cfg.dim, 0.0);
  const SqueezedVacuum second = squeezed_vacuum(cfg.r2(), cfg.dim, cfg.relative_phase_deg * kDeg);
  const TwoModeState mixed = beam_splitter(TwoModeState::product(first.state, second.state),
                                           cfg.transmissivity());
  TwoModeInput out{mixed.swapped().normalized(), {}};
  const double kept = mixed.norm() * mixed.norm();
  out.truncation.captured = first.truncation.captured * second.truncation.captured * kept;
  out.truncation.warning = out.truncation.captured < 1.0 - kLeakageWarning;
  return out;
}

PureHerald herald_ideal(const TwoModeState& state, int n) {
  if (n < 0 || n >= state.dim()) throw std::invalid_argument("herald count outside truncation");
  const CVector signal = state.amps().col(n);
  const double prob = signal.squaredNorm() / state.amps().squaredNorm();
  if (!(prob >= kMinHeraldProbability)) {
    std::ostringstream msg;
    msg << "unheraldable: P(n = " << n << ") = " << prob;
    throw UnheraldableError(msg.str());
  }
  return {FockState(signal).normalized(), prob};
}

std::vector<double> click_povm(std::span<const Detector> bank, double window_s, int k, int dim) {
  const int count = static_cast<int>(bank.size());
  if (count == 0 || count > 16) throw std::invalid_argument("detector bank needs 1 to 16 detectors");
  if (k < 0 || k > count) throw std::invalid_argument("click count outside [0, bank size]");
  if (dim < 1) throw std::invalid_argument("truncation dimension must be >= 1");

  std::vector<double> dark(count);
  std::vector<double> catch_prob(count);  // photon routed to i and detected
  double missed = 1.0;
  for (int i = 0; i < count; ++i) {
    dark[i] = dark_click_probability(bank[i], window_s);
    catch_prob[i] = bank[i].efficiency / count;
    missed -= catch_prob[i];
  }
  missed = std::max(0.0, missed);
  const unsigned masks = 1u << count;

  // Dark clicks topping a photon-hit set up to exactly k clicks.
  std::vector<double> top_up(masks, 0.0);
  for (unsigned hit = 0; hit < masks; ++hit) {
    const int need = k - std::popcount(hit);
    if (need < 0) continue;
    const unsigned rest = (masks - 1) & ~hit;
    for (unsigned d = rest;; d = (d - 1) & rest) {
      if (std::popcount(d) == need) {
        double p = 1.0;
        for (int i = 0; i < count; ++i) {
          if (rest & (1u << i)) p *= (d & (1u << i)) ? dark[i] : 1.0 - dark[i];
        }
        top_up[hit] += p;
      }
      if (d == 0) break;
    }
  }

  // Distribution of the set of detectors hit by at least one detected photon,
  // advanced one photon at a time. Every term is non-negative.
  std::vector<double> dist(masks, 0.0);
  std::vector<double> next(masks);
  dist[0] = 1.0;
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int m = 0; m < dim; ++m) {
    double p = 0.0;
    for (unsigned hit = 0; hit < masks; ++hit) p += dist[hit] * top_up[hit];
    out[m] = p;
    std::fill(next.begin(), next.end(), 0.0);
    for (unsigned hit = 0; hit < masks; ++hit) {
      if (dist[hit] == 0.0) continue;
      double stay = missed;
      for (int i = 0; i < count; ++i) {
        if (hit & (1u << i)) {
          stay += catch_prob[i];
        } else {
          next[hit | (1u << i)] += dist[hit] * catch_prob[i];
        }
      }
      next[hit] += dist[hit] * stay;
    }
    dist.swap(next);
  }
  return out;
}

double click_probability(std::span<const Detector> bank, double window_s, int k, int photons) {
  if (photons < 0) throw std::invalid_argument("photon number must be >= 0");
  return click_povm(bank, window_s, k, photons + 1).back();
}

HeraldedState herald_realistic(const GpsConfig& cfg, const TwoModeState& input, int k) {
  cfg.validate();
  const int dim = input.dim();
  const std::vector<double> clicks = click_povm(cfg.detector_bank, cfg.window_s, k, dim);
  // Idler loss composed with the diagonal click element stays diagonal:
  // w_m = sum_j C(m, j) eta^j (1 - eta)^(m - j) P(k | j).
  const double eta = cfg.idler_efficiency;
  std::vector<double> weight(static_cast<std::size_t>(dim), 0.0);
  for (int m = 0; m < dim; ++m) {
    for (int j = 0; j <= m; ++j) {
      const double log_binom = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
      weight[m] += std::exp(log_binom) * std::pow(eta, j) * std::pow(1.0 - eta, m - j) * clicks[j];
    }
  }
  CMatrix rho = CMatrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    if (weight[m] == 0.0) continue;
    const CVector s = input.amps().col(m);
    rho.noalias() += weight[m] * (s * s.adjoint());
  }
  const double prob = rho.trace().real() / input.amps().squaredNorm();
  if (!(prob >= kMinHeraldProbability)) {
    std::ostringstream msg;
    msg << "unheraldable: P(" << k << " clicks) = " << prob;
    throw UnheraldableError(msg.str());
  }
  DensityOperator state = DensityOperator(std::move(rho)).symmetrized();
  return {std::move(state), prob, prob * cfg.mode_rate_hz, std::nullopt};
}

HeraldedState herald_realistic(const GpsConfig& cfg, int k) {
  return herald_realistic(cfg, build_input(cfg).state, k);
}

HeraldedState herald_ideal(const GpsConfig& cfg) {
  const TwoModeInput input = build_input(cfg);
  PureHerald h = herald_ideal(input.state, cfg.herald_n);
  return {DensityOperator::pure(h.state), h.probability, h.probability * cfg.mode_rate_hz, std::nullopt};
}

HeraldModel parse_herald_model(const std::string& name) {
  if (name == "ideal") return HeraldModel::kIdeal;
  if (name == "realistic") return HeraldModel::kRealistic;
  throw std::invalid_argument("herald_model must be \"ideal\" or \"realistic\"");
}

std::string to_string(HeraldModel model) {
  return model == HeraldModel::kIdeal ? "ideal" : "realistic";
}

double calibrate_mode_rate(GpsConfig cfg, double reflectivity, double rate_cps, int clicks) {
  cfg.reflectivity = reflectivity;
  cfg.mode_rate_hz = 1.0;
  return rate_cps / herald_realistic(cfg, clicks).herald_prob;
}

}  // namespace gpslab
