#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorafmar/core/random.hpp"
#include "lorafmar/phy/transmission.hpp"

namespace lorafmar::phy {

enum class CaptureMode { threshold, empirical };

inline std::string_view to_string(CaptureMode m) { return m == CaptureMode::threshold ? "threshold" : "empirical"; }

inline CaptureMode capture_mode_from_string(std::string_view s) {
  if (s == "threshold") return CaptureMode::threshold;
  if (s == "empirical") return CaptureMode::empirical;
  throw std::invalid_argument("unknown capture mode '" + std::string(s) + "'");
}

// Loss rates measured for two fully overlapping same-channel transmitters.
struct PairLossObservation {
  int sf_a = 7;
  int sf_b = 7;
  double loss_a = 0;
  double loss_b = 0;
  double loss_both = 0;

  bool operator==(const PairLossObservation&) const = default;
};

// Testbed measurements of synchronized same-channel pairs.
inline std::vector<PairLossObservation> measured_pair_losses() {
  return {
      {7, 7, 0.943, 0.35, 0.2966},
      {7, 8, 0.047, 0.0323, 0.0012},
      {8, 8, 0.1796, 0.8488, 0.0346},
      {8, 9, 0.32, 0.0, 0.0},
      {9, 10, 0.0518, 0.0, 0.0},
  };
}

struct SurvivalPair {
  double a_vs_b = 1.0;  // P(a decoded | overlapped by b)
  double b_vs_a = 1.0;
};

// Per-party survival probabilities for independent sampling, used when more
// than one interferer overlaps. Independence cannot reproduce three measured
// numbers at once, so the joint loss is kept exact: both marginals are scaled
// by k = sqrt(both / (la * lb)). Same-SF pairs collapse to l = sqrt(both).
inline SurvivalPair fit_independent_survival(const PairLossObservation& o) {
  double la = o.loss_a, lb = o.loss_b;
  if (o.sf_a == o.sf_b) {
    const double l = std::sqrt(o.loss_both);
    la = lb = l;
  } else if (la > 0 && lb > 0) {
    const double k = std::sqrt(o.loss_both / (la * lb));
    la = std::min(1.0, k * la);
    lb = std::min(1.0, k * lb);
  }
  return {1.0 - la, 1.0 - lb};
}

struct CaptureModel {
  CaptureMode mode = CaptureMode::empirical;

  // threshold mode
  double co_sf_capture_margin_db = 6.0;
  double inter_sf_isolation_db = 16.0;

  // empirical mode: (own SF, interferer SF) -> survival probability
  std::map<std::pair<int, int>, double> survival;
  // empirical mode, exactly one interferer: the measured pair, keyed by (sf_a, sf_b)
  std::map<std::pair<int, int>, PairLossObservation> pairs;
  double unlisted_same_sf_survival = 0.0;
  double unlisted_cross_sf_survival = 1.0;

  static CaptureModel fitted_defaults() {
    CaptureModel m;
    for (const auto& o : measured_pair_losses()) m.add_observation(o);
    return m;
  }

  void add_observation(const PairLossObservation& o) {
    const SurvivalPair s = fit_independent_survival(o);
    survival[{o.sf_a, o.sf_b}] = s.a_vs_b;
    survival[{o.sf_b, o.sf_a}] = s.b_vs_a;
    pairs[{o.sf_a, o.sf_b}] = o;
    pairs[{o.sf_b, o.sf_a}] = PairLossObservation{o.sf_b, o.sf_a, o.loss_b, o.loss_a, o.loss_both};
  }

  const PairLossObservation* pair_observation(int sf_a, int sf_b) const {
    auto it = pairs.find({sf_a, sf_b});
    return it == pairs.end() ? nullptr : &it->second;
  }

  double survival_probability(int own_sf, int interferer_sf) const {
    if (auto it = survival.find({own_sf, interferer_sf}); it != survival.end()) return it->second;
    return own_sf == interferer_sf ? unlisted_same_sf_survival : unlisted_cross_sf_survival;
  }

  void validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    for (const auto& [key, p] : survival)
      if (!in01(p))
        throw std::invalid_argument("survival probability for SF" + std::to_string(key.first) + " vs SF" +
                                    std::to_string(key.second) + " outside [0,1]");
    if (!in01(unlisted_same_sf_survival) || !in01(unlisted_cross_sf_survival))
      throw std::invalid_argument("fallback survival probability outside [0,1]");
    for (const auto& [key, o] : pairs) {
      const std::string what = "pair SF" + std::to_string(key.first) + "/SF" + std::to_string(key.second);
      if (!in01(o.loss_a) || !in01(o.loss_b) || !in01(o.loss_both))
        throw std::invalid_argument(what + ": loss rates outside [0,1]");
      if (o.loss_both > std::min(o.loss_a, o.loss_b) + 1e-12)
        throw std::invalid_argument(what + ": joint loss exceeds a single-party loss");
      if (o.loss_a + o.loss_b - o.loss_both > 1.0 + 1e-12)
        throw std::invalid_argument(what + ": loss rates are not a valid joint distribution");
    }
  }
};

// One shared uniform per overlapping pair, so the two verdicts of a pair are
// drawn jointly. Whichever party is resolved first draws; the second reuses.
class PairDraws {
 public:
  double draw(std::uint64_t a, std::uint64_t b, SimTime expires, RandomStream& rng) {
    const auto key = std::minmax(a, b);
    if (auto it = draws_.find(key); it != draws_.end()) {
      const double u = it->second.first;
      draws_.erase(it);
      return u;
    }
    const double u = rng.uniform01();
    draws_.emplace(key, std::make_pair(u, expires));
    return u;
  }

  // Forgets draws whose partner was never resolved (e.g. preempted).
  void prune(SimTime now) {
    std::erase_if(draws_, [&](const auto& kv) { return kv.second.second < now; });
  }

  std::size_t size() const { return draws_.size(); }

 private:
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<double, SimTime>> draws_;
};

// Roles for a measured pair: cross-SF pairs by SF; same-SF pairs give the
// larger loss to the weaker signal, and the mean of the two to both parties
// when received powers are equal.
inline std::pair<double, double> pair_losses(const PairLossObservation& o, const Transmission& target,
                                             const Transmission& other) {
  if (o.sf_a != o.sf_b) return {o.loss_a, o.loss_b};
  const double hi = std::max(o.loss_a, o.loss_b), lo = std::min(o.loss_a, o.loss_b);
  if (target.rx_power_dbm < other.rx_power_dbm) return {hi, lo};
  if (target.rx_power_dbm > other.rx_power_dbm) return {lo, hi};
  return {(hi + lo) / 2, (hi + lo) / 2};
}

// Joint outcome from one uniform u. With the "a" party fixed as the lower
// id, P(a lost) = la, P(b lost) = lb, P(both lost) = both.
inline bool coupled_lost(bool target_is_a, double la, double lb, double both, double u) {
  if (target_is_a) return u < la;
  return u < both || (u >= la && u < la + lb - both);
}

// Decides whether `target` is decoded despite `interferers` (all on its
// channel and overlapping it in time). In empirical mode a lone interferer
// from a measured pair is resolved jointly through `draws`; otherwise one
// Bernoulli per interferer, visited in id order so the draw sequence does not
// depend on container order.
inline bool survives(const Transmission& target, std::span<const Transmission* const> interferers,
                     const CaptureModel& model, RandomStream& rng, PairDraws* draws = nullptr) {
  if (interferers.empty()) return true;
  if (model.mode == CaptureMode::empirical && draws && interferers.size() == 1) {
    const Transmission& other = *interferers.front();
    if (const auto* o = model.pair_observation(target.params.sf, other.params.sf)) {
      const bool target_is_a = target.id < other.id;
      const auto [lt, lo] = pair_losses(*o, target, other);
      const double la = target_is_a ? lt : lo;
      const double lb = target_is_a ? lo : lt;
      const SimTime expires = std::max(target.end(), other.end()) + Duration::seconds(60);
      return !coupled_lost(target_is_a, la, lb, o->loss_both, draws->draw(target.id, other.id, expires, rng));
    }
  }
  std::vector<const Transmission*> sorted(interferers.begin(), interferers.end());
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

  bool ok = true;
  for (const Transmission* other : sorted) {
    if (model.mode == CaptureMode::empirical) {
      const double p = model.survival_probability(target.params.sf, other->params.sf);
      if (!rng.bernoulli(p)) ok = false;
    } else {
      const double margin = target.rx_power_dbm - other->rx_power_dbm;
      if (target.params.sf == other->params.sf) {
        if (margin < model.co_sf_capture_margin_db) ok = false;
      } else if (-margin > model.inter_sf_isolation_db) {
        ok = false;
      }
    }
  }
  return ok;
}

// Resolves a set of mutually overlapping transmissions at one gateway.
// Returns decoded/lost keyed by transmission id.
inline std::map<std::uint64_t, bool> resolve_receptions(std::span<const Transmission> overlapping,
                                                        const CaptureModel& model, RandomStream& rng) {
  std::vector<const Transmission*> order;
  for (const auto& t : overlapping) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::map<std::uint64_t, bool> decoded;
  std::vector<const Transmission*> others;
  PairDraws draws;
  for (const Transmission* t : order) {
    others.clear();
    for (const Transmission* o : order)
      if (o != t && o->channel == t->channel && o->overlaps(*t)) others.push_back(o);
    decoded[t->id] = survives(*t, others, model, rng, &draws);
  }
  return decoded;
}

}  // namespace lorafmar::phy
