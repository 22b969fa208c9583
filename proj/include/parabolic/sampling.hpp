#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/point.hpp"

namespace parabolic {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// [t_lo, t_hi] x prod_i [lo_i, hi_i]. Coordinates are addressed as a flat
/// vector (t, x_1, ..., x_n).
class SpaceTimeBox {
 public:
  SpaceTimeBox(Interval time, std::vector<Interval> space)
      : time_(time), space_(std::move(space)) {
    if (!(time_.lo < time_.hi)) {
      throw DomainError("SpaceTimeBox: empty time interval");
    }
    if (space_.empty()) {
      throw DomainError("SpaceTimeBox: spatial dimension must be >= 1");
    }
    for (const auto& iv : space_) {
      if (!(iv.lo <= iv.hi)) {
        throw DomainError("SpaceTimeBox: empty spatial interval");
      }
    }
  }

  const Interval& time() const { return time_; }
  const std::vector<Interval>& space() const { return space_; }
  std::size_t spatial_dim() const { return space_.size(); }
  std::size_t coords() const { return space_.size() + 1; }

  const Interval& axis(std::size_t i) const {
    return i == 0 ? time_ : space_[i - 1];
  }

  bool contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < coords(); ++i) {
      if (!axis(i).contains(p[i])) return false;
    }
    return true;
  }

 private:
  Interval time_;
  std::vector<Interval> space_;
};

struct SamplerConfig {
  std::size_t budget = 1000;  ///< number of base points
  std::uint64_t seed = 42;
  int refinement_levels = 20;  ///< local pairs at relative distances 2^-k
};

/// Deterministic pair generator over a box.
///
/// Base points come in Latin-hypercube batches of 64, 64, 128, 256, ...; each
/// batch is drawn from its own engine so a larger budget only appends points.
/// Every base point is paired with a random earlier base point and with one
/// local neighbour per refinement level k at relative distance 2^-k. Only the
/// coordinates from `free_begin` on are moved, which lets the nondegeneracy
/// estimator keep (t, x) fixed and vary the implicit block alone.
class PairSampler {
 public:
  PairSampler(const SpaceTimeBox& box, SamplerConfig cfg,
              std::size_t free_begin = 0)
      : box_(box), cfg_(cfg), free_begin_(free_begin) {
    if (cfg_.budget < 2) throw DomainError("PairSampler: budget must be >= 2");
    if (free_begin_ >= box_.coords()) {
      throw DomainError("PairSampler: no free coordinates");
    }
  }

  /// Calls fn(base, partners) once per base point, in a fixed order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    const std::size_t dims = box_.coords();
    std::vector<std::vector<double>> bases;
    bases.reserve(cfg_.budget);
    std::vector<std::vector<double>> partners;
    std::size_t emitted = 0;
    for (std::uint64_t batch = 0; emitted < cfg_.budget; ++batch) {
      const std::size_t size = batch_size(batch);
      std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed),
                        static_cast<std::uint32_t>(cfg_.seed >> 32),
                        static_cast<std::uint32_t>(batch)};
      std::mt19937_64 rng(seq);
      const auto lhs = latin_hypercube(size, dims, rng);
      const std::size_t take = std::min(size, cfg_.budget - emitted);
      for (std::size_t i = 0; i < take; ++i) {
        std::vector<double> base(lhs.begin() + i * dims,
                                 lhs.begin() + (i + 1) * dims);
        partners.clear();
        if (!bases.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
          std::vector<double> q = base;
          const auto& other = bases[pick(rng)];
          std::copy(other.begin() + free_begin_, other.end(),
                    q.begin() + free_begin_);
          partners.push_back(std::move(q));
        }
        for (int k = 1; k <= cfg_.refinement_levels; ++k) {
          partners.push_back(neighbour(base, std::ldexp(1.0, -k), rng));
        }
        fn(std::span<const double>(base),
           static_cast<const std::vector<std::vector<double>>&>(partners));
        bases.push_back(std::move(base));
        ++emitted;
      }
    }
  }

  const SpaceTimeBox& box() const { return box_; }

 private:
  static std::size_t batch_size(std::uint64_t batch) {
    return batch == 0 ? 64 : std::size_t{64} << (batch - 1);
  }

  std::vector<double> latin_hypercube(std::size_t size, std::size_t dims,
                                      std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> pts(size * dims);
    std::vector<std::size_t> perm(size);
    for (std::size_t d = 0; d < dims; ++d) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      const Interval& iv = box_.axis(d);
      for (std::size_t i = 0; i < size; ++i) {
        const double u = (static_cast<double>(perm[i]) + unit(rng)) /
                         static_cast<double>(size);
        pts[i * dims + d] = std::clamp(iv.lo + u * iv.width(), iv.lo, iv.hi);
      }
    }
    return pts;
  }

  std::vector<double> neighbour(std::span<const double> base, double h,
                                std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(base.size(), 0.0);
    double len2 = 0.0;
    for (std::size_t d = free_begin_; d < base.size(); ++d) {
      dir[d] = gauss(rng);
      len2 += dir[d] * dir[d];
    }
    const double len = len2 > 0.0 ? std::sqrt(len2) : 1.0;
    std::vector<double> q(base.begin(), base.end());
    for (std::size_t d = free_begin_; d < base.size(); ++d) {
      const Interval& iv = box_.axis(d);
      double v = base[d] + h * iv.width() * dir[d] / len;
      if (v > iv.hi) v = 2.0 * iv.hi - v;
      if (v < iv.lo) v = 2.0 * iv.lo - v;
      q[d] = std::clamp(v, iv.lo, iv.hi);
    }
    return q;
  }

  SpaceTimeBox box_;
  SamplerConfig cfg_;
  std::size_t free_begin_;
};

/// Uniform direction on S^{n-1} by normalizing a Gaussian vector.
inline std::vector<double> random_unit_vector(std::size_t n,
                                              std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(n);
  double len = 0.0;
  while (len < 1e-8) {
    for (double& c : v) c = gauss(rng);
    len = euclidean_norm(v);
  }
  for (double& c : v) c /= len;
  return v;
}

}  // namespace parabolic
