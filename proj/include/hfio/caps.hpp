#pragma once

// Maximal 2^{-k/2}-separated direction sets and the homogeneous angular
// partition chi_nu subordinate to them.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hfio/errors.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

/// Number of equiangular points on the circle that stay delta-separated:
/// max{N : 2 sin(pi/N) >= delta}.
inline int circle_cap_count(double delta) {
  require(delta > 0.0 && delta <= 2.0, "circle_cap_count: separation must lie in (0, 2]");
  const double tol = 1e-12;
  int n = std::max(2, static_cast<int>(std::floor(kPi / std::asin(std::min(1.0, delta / 2.0)))));
  while (2.0 * std::sin(kPi / (n + 1)) >= delta - tol) ++n;
  while (n > 2 && 2.0 * std::sin(kPi / n) < delta - tol) --n;
  return n;
}

struct CapCertificate {
  std::size_t candidates_tested = 0;
  std::size_t centers_added = 0;  // candidates that violated maximality and were inserted
};

class CapSystem {
public:
  CapSystem() = default;

  int level() const { return level_; }
  int dim() const { return dim_; }
  double separation() const { return separation_; }
  double support_radius() const { return support_radius_; }
  std::size_t size() const { return centers_.size(); }
  const std::vector<Vec>& centers() const { return centers_; }
  const Vec& center(std::size_t i) const { return centers_[i]; }
  const CapCertificate& certificate() const { return certificate_; }

  /// Unnormalized bump of cap nu at a unit vector.
  double bump(std::size_t nu, const Vec& unit) const {
    const double d = norm(unit - centers_[nu]);
    return d >= support_radius_ ? 0.0 : 1.0 - smooth_step(d / support_radius_);
  }

  /// Caps whose support contains the unit vector.
  std::vector<std::size_t> nearby(const Vec& unit) const {
    std::vector<std::size_t> out;
    if (dim_ == 2) {
      const double a = std::atan2(unit[1], unit[0]);
      const int n = static_cast<int>(centers_.size());
      const int base = static_cast<int>(std::floor(a / kTwoPi * n));
      for (int j = base - 3; j <= base + 4; ++j) {
        const std::size_t idx = static_cast<std::size_t>(((j % n) + n) % n);
        if (norm(unit - centers_[idx]) < support_radius_ &&
            std::find(out.begin(), out.end(), idx) == out.end())
          out.push_back(idx);
      }
      return out;
    }
    for (std::size_t i = 0; i < centers_.size(); ++i)
      if (norm(unit - centers_[i]) < support_radius_) out.push_back(i);
    return out;
  }

  double partition_sum(const Vec& unit) const {
    double s = 0.0;
    for (auto i : nearby(unit)) s += bump(i, unit);
    return s;
  }

  /// chi_nu(eta); homogeneous of degree 0, with chi_nu(0) = 1/|Theta_k| so that
  /// the partition is exact on the whole lattice.
  double chi(std::size_t nu, const Vec& eta) const {
    const double r = norm(eta);
    if (r == 0.0) return 1.0 / static_cast<double>(centers_.size());
    const Vec unit = (1.0 / r) * eta;
    const double b = bump(nu, unit);
    if (b == 0.0) return 0.0;
    return b / partition_sum(unit);
  }

  /// Widened companion: 1 on supp chi_nu, vanishing beyond 1.5x the cap radius.
  double chi_wide(std::size_t nu, const Vec& eta) const {
    const double r = norm(eta);
    if (r == 0.0) return 1.0;
    const double d = norm((1.0 / r) * eta - centers_[nu]);
    return plateau_cutoff(d, support_radius_, 1.5 * support_radius_);
  }

  FourierMultiplier chi_multiplier(std::size_t nu) const {
    MultiplierInfo info;
    info.name = "chi_" + std::to_string(nu);
    info.homogeneity = 0.0;
    return FourierMultiplier([this, nu](const Vec& eta) { return cplx(chi(nu, eta)); }, info);
  }

  /// Angle (radians) subtended by a cap support around its center.
  double support_angle() const { return 2.0 * std::asin(std::min(1.0, support_radius_ / 2.0)); }

  friend CapSystem build_caps(int k, int n);

  /// Subset of caps whose support lies inside the cone of half-aperture
  /// `aperture` around `axis`.
  std::vector<std::size_t> inside_cone(const Vec& axis, double aperture) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const double ang = std::acos(std::clamp(dot(centers_[i], axis), -1.0, 1.0));
      if (ang + support_angle() <= aperture + 1e-12) out.push_back(i);
    }
    return out;
  }

private:
  int level_ = 0;
  int dim_ = 2;
  double separation_ = 1.0;
  double support_radius_ = 0.65;
  std::vector<Vec> centers_;
  CapCertificate certificate_;
};

namespace detail {

/// Vertices of an icosahedron with every face subdivided `freq` times,
/// projected to the unit sphere.
inline std::vector<Vec> icosahedral_mesh(int freq) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                            {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                            {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  std::vector<Vec> out;
  // Deduplicate shared edge points through a coarse hash on rounded coordinates.
  std::unordered_map<long long, std::size_t> seen;
  auto key = [](const Vec& p) {
    const long long a = std::llround(p[0] * 1e6), b = std::llround(p[1] * 1e6), c = std::llround(p[2] * 1e6);
    return (a * 73856093LL) ^ (b * 19349663LL) ^ (c * 83492791LL);
  };
  for (const auto& f : faces) {
    const Vec& A = v[f[0]];
    const Vec& B = v[f[1]];
    const Vec& C = v[f[2]];
    for (int i = 0; i <= freq; ++i)
      for (int j = 0; j <= freq - i; ++j) {
        const double a = static_cast<double>(i) / freq, b = static_cast<double>(j) / freq;
        Vec p = (1.0 - a - b) * A + a * B;
        p = p + b * C;
        p = (1.0 / norm(p)) * p;
        const long long h = key(p);
        auto it = seen.find(h);
        if (it != seen.end() && norm(out[it->second] - p) < 1e-9) continue;
        seen.emplace(h, out.size());
        out.push_back(p);
      }
  }
  return out;
}

/// Spatial hash over unit vectors for separation queries.
class SphereHash {
public:
  explicit SphereHash(double cell) : cell_(cell) {}
  void insert(const Vec& p, std::size_t id) { buckets_[key(cell_of(p))].push_back({p, id}); }
  bool any_within(const Vec& p, double radius) const {
    auto c = cell_of(p);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == buckets_.end()) continue;
          for (const auto& e : it->second)
            if (norm(e.first - p) < radius) return true;
        }
    return false;
  }

private:
  std::array<long long, 3> cell_of(const Vec& p) const {
    return {static_cast<long long>(std::floor(p[0] / cell_)), static_cast<long long>(std::floor(p[1] / cell_)),
            static_cast<long long>(std::floor(p[2] / cell_))};
  }
  static long long key(const std::array<long long, 3>& c) {
    return (c[0] * 73856093LL) ^ (c[1] * 19349663LL) ^ (c[2] * 83492791LL);
  }
  double cell_;
  std::unordered_map<long long, std::vector<std::pair<Vec, std::size_t>>> buckets_;
};

}  // namespace detail

/// Theta_k with its angular partition.
///
/// n = 2: N_k equiangular centers starting at e_1, cap support radius 0.65 delta.
/// n = 3: greedy insertion over a fine icosahedral mesh, certified maximal by
/// 10^5 seeded random candidates; cap support radius 1.5 delta.
inline CapSystem build_caps(int k, int n) {
  require(k >= 0, "build_caps: level must be nonnegative");
  require(n == 2 || n == 3, "build_caps: dimension must be 2 or 3");
  CapSystem caps;
  caps.level_ = k;
  caps.dim_ = n;
  caps.separation_ = std::pow(2.0, -0.5 * k);
  const double delta = caps.separation_;
  if (n == 2) {
    const int count = circle_cap_count(delta);
    for (int j = 0; j < count; ++j) {
      const double a = kTwoPi * j / count;
      caps.centers_.push_back({std::cos(a), std::sin(a), 0.0});
    }
    caps.support_radius_ = 0.65 * delta;
    return caps;
  }
  caps.support_radius_ = 1.5 * delta;
  const int freq = std::max(4, static_cast<int>(std::ceil(8.0 / delta)));
  detail::SphereHash hash(delta);
  auto try_insert = [&](const Vec& p) {
    if (hash.any_within(p, delta)) return false;
    hash.insert(p, caps.centers_.size());
    caps.centers_.push_back(p);
    return true;
  };
  for (const auto& p : detail::icosahedral_mesh(freq)) try_insert(p);
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(k));
  std::normal_distribution<double> gauss;
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) {
    Vec p{gauss(rng), gauss(rng), gauss(rng)};
    p = (1.0 / norm(p)) * p;
    if (try_insert(p)) ++caps.certificate_.centers_added;
  }
  caps.certificate_.candidates_tested = trials;
  return caps;
}

}  // namespace hfio
