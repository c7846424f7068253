#include "octstrip/inverse_time.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "octstrip/constants.hpp"

namespace octstrip {

namespace {

bool in_band(double n, double lo, double hi) { return n >= lo && n <= hi; }

double implied_index(double n_current, double rho) {
  return n_current * (1.0 - rho) / (1.0 + rho);
}

}  // namespace

void TimeReconstructionConfig::validate() const {
  if (!(n_lo > 0.0) || !(n_lo < n_hi))
    throw std::invalid_argument("index band must satisfy 0 < n_lo < n_hi");
  if (!(exit_n_lo >= 0.0) || !(exit_n_lo < n_hi))
    throw std::invalid_argument("exit index band must satisfy 0 <= exit_n_lo < n_hi");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(n0 > 0.0)) throw std::invalid_argument("ambient index must be positive");
  if (!(l_pre >= 0.0)) throw std::invalid_argument("source standoff must be non-negative");
}

IndexStep recover_index_step(const std::vector<double>& rho_history, double p_next,
                             double n_current, double n_lo, double n_hi) {
  if (p_next == 0.0) return {0.0, n_current, false};

  double transmission = 1.0;  // accumulated prod (1 - rho_j^2)
  for (double r : rho_history) transmission *= 1.0 - r * r;
  if (!(transmission > 0.0) || !std::isfinite(transmission))
    throw std::runtime_error("interfaces above transmit nothing; deeper layers unrecoverable");

  const double rho = std::abs(p_next) / transmission;
  double n = implied_index(n_current, rho);
  if (in_band(n, n_lo, n_hi)) return {rho, n, false};

  n = implied_index(n_current, -rho);
  if (in_band(n, n_lo, n_hi)) return {-rho, n, true};

  throw std::runtime_error("layer index out of bounds for both reflection signs (got " +
                           std::to_string(implied_index(n_current, rho)) + " / " +
                           std::to_string(n) + ")");
}

double recover_length_step(double t_a, double t_b, double n_traversed, double l_prev) {
  if (!(t_b > t_a)) throw std::invalid_argument("echo arrivals must increase in time");
  if (!(n_traversed > 0.0)) throw std::invalid_argument("traversed index must be positive");
  const double length = 0.5 * (speed_of_light * (t_b - t_a) / n_traversed - l_prev);
  if (length < 0.0)
    throw std::runtime_error("negative layer thickness: arrivals inconsistent with geometry");
  return length;
}

PeakList suppress_multiples(const PeakList& peaks, double t_ref, double n_layer,
                            double l_layer, double tol, std::size_t max_order) {
  const double period = 2.0 * n_layer * l_layer / speed_of_light;
  if (period <= 0.0 || max_order == 0) return peaks;

  PeakList kept;
  kept.reserve(peaks.size());
  for (const Peak& pk : peaks) {
    bool multiple = false;
    if (pk.t > t_ref) {
      for (std::size_t j = 1; j <= max_order; ++j) {
        const double tau = t_ref + static_cast<double>(j) * period;
        if (tau > pk.t + tol) break;
        if (std::abs(pk.t - tau) < tol) {
          multiple = true;
          break;
        }
      }
    }
    if (!multiple) kept.push_back(pk);
  }
  return kept;
}

ReconstructionResult reconstruct_time(const PeakList& peaks,
                                      const TimeReconstructionConfig& cfg) {
  cfg.validate();

  ReconstructionResult res;
  if (peaks.empty() && cfg.layers == 0) return res;

  PeakList work = peaks;
  std::sort(work.begin(), work.end(),
            [](const Peak& a, const Peak& b) { return a.t < b.t; });
  const std::size_t max_order =
      work.size() / std::max<std::size_t>(cfg.layers, 1);

  std::vector<double> rho_history;
  double n_above = cfg.n0;       // index of the region the echo just crossed
  double n_two_back = cfg.n0;    // index one region earlier (legacy rule)
  double t_prev = 0.0;           // virtual emission-time reference
  double l_last = cfg.l_pre;     // previously recovered length (legacy rule)
  std::size_t next = 0;          // first unconsumed surviving peak

  for (std::size_t k = 0; k <= cfg.layers; ++k) {
    if (next >= work.size())
      throw std::runtime_error("underdetermined: fewer surviving peaks than interfaces (" +
                               std::to_string(work.size()) + " for " +
                               std::to_string(cfg.layers + 1) + ")");
    const Peak major = work[next];
    ++next;

    const bool exit_interface = (k == cfg.layers);
    const IndexStep step =
        recover_index_step(rho_history, major.amplitude, n_above,
                           exit_interface ? cfg.exit_n_lo : cfg.n_lo, cfg.n_hi);

    double n_traversed = n_above;
    double l_prev = 0.0;
    if (k == 0) {
      n_traversed = cfg.n0;
      l_prev = cfg.l_pre;
    } else if (cfg.length_rule == LengthRule::legacy_recursive) {
      n_traversed = n_two_back;
      l_prev = l_last;
    }
    const double length = recover_length_step(t_prev, major.t, n_traversed, l_prev);

    rho_history.push_back(step.rho);
    res.rho.push_back(step.rho);
    res.n.push_back(step.n);
    res.sign_flips += step.flipped ? 1 : 0;
    if (k == 0)
      res.l_front = length;
    else
      res.lengths.push_back(length);
    res.interfaces.push_back(res.interfaces.empty() ? length
                                                    : res.interfaces.back() + length);

    const std::size_t before = work.size();
    work = suppress_multiples(work, major.t, n_above, length, cfg.tol, max_order);
    res.suppressed_peaks += before - work.size();

    n_two_back = n_above;
    n_above = step.n;
    t_prev = major.t;
    l_last = length;
  }
  return res;
}

double optical_thickness_error(const std::vector<double>& n_true,
                               const std::vector<double>& l_true,
                               const ReconstructionResult& rec) {
  if (n_true.size() != l_true.size() || n_true.size() != rec.lengths.size() ||
      rec.n.size() != rec.lengths.size() + 1)
    throw std::invalid_argument("layer count mismatch between truth and reconstruction");
  double sum = 0.0;
  for (std::size_t k = 0; k < n_true.size(); ++k) {
    const double d = n_true[k] * l_true[k] - rec.n[k] * rec.lengths[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace octstrip
