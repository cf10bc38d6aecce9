#pragma once

// Focusing and unit-scale wave-packet families and slope regressions.
//
// Focusing packet at level k and cap direction nu:
//   f_nu(x) = e^{i 2^k nu.x} psi(2^k (nu.x) nu + 2^{k/2} Pi_nu^perp x),
//   f_nu^(eta) = 2^{-k(n+1)/2} psi^(A^{-1}(eta - 2^k nu)),  A = diag(2^k, 2^{k/2}, ...).
// Unit-scale packet: g_nu(x) = e^{i 2^k nu.x} psi_g(x).
// Both are built on the frequency side from a compactly supported psi^.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/caps.hpp"
#include "hfio/errors.hpp"
#include "hfio/fio_norms.hpp"
#include "hfio/quadrature.hpp"
#include "hfio/spectral.hpp"
#include "hfio/wavepacket.hpp"

namespace hfio {

enum class FamilyKind { focusing, unit_scale, single_packet };

inline FamilyKind parse_family_kind(const std::string& s) {
  if (s == "focusing") return FamilyKind::focusing;
  if (s == "unit_scale" || s == "unit-scale") return FamilyKind::unit_scale;
  if (s == "single_packet" || s == "single-packet" || s == "single") return FamilyKind::single_packet;
  throw DomainError("unknown family kind '" + s + "'");
}

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::focusing: return "focusing";
    case FamilyKind::unit_scale: return "unit_scale";
    default: return "single_packet";
  }
}

/// Grid used for level k: period L and N = max(min_points, 2^{k + 3}) points
/// per axis, which keeps the packet band (|eta| <= 1.3 2^k + ...) below pi N / L.
struct GridPolicy {
  double period = 6.0 * kPi;
  int min_points = 32;
  int extra_octaves = 3;

  PeriodicGrid grid(int k, int dim) const {
    int n = 1;
    while (n < min_points || n < (1 << std::max(0, k + extra_octaves))) n *= 2;
    return PeriodicGrid(dim, n, period);
  }
};

struct PacketFamilySpec {
  FamilyKind kind = FamilyKind::focusing;
  int dim = 2;
  Vec axis{1.0, 0.0, 0.0};
  double aperture = kPi / 4.0;       // half-aperture of the cone V
  double focusing_radius = 0.3;      // c' of psi^ in anisotropic coordinates
  double unit_radius = 0.9;          // c' of psi_g^ (absolute frequency units)
  std::vector<int> ks{3, 4, 5, 6, 7};
  GridPolicy grid;

  void validate() const {
    require(dim == 2 || dim == 3, "PacketFamilySpec: dimension must be 2 or 3");
    require(std::abs(norm(axis) - 1.0) < 1e-12, "PacketFamilySpec: axis must be a unit vector");
    require(ks.size() >= 3, "PacketFamilySpec: k range must contain at least three levels");
    // |(1 - r) nu + r omega| >= 1/2 for nu, omega in V reduces to cos(aperture) >= 1/2 (worst case r = 1/2).
    require(aperture > 0.0 && aperture <= kPi / 3.0 + 1e-12, "PacketFamilySpec: aperture must lie in (0, pi/3]");
    require(focusing_radius > 0.0 && focusing_radius < 0.35, "PacketFamilySpec: focusing radius must lie in (0, 0.35)");
    require(unit_radius > 0.0, "PacketFamilySpec: unit radius must be positive");
  }
};

/// Radial C^infinity bump of radius c on the frequency side.
inline double packet_bump(double rho, double c) { return rho >= c ? 0.0 : 1.0 - smooth_step(rho / c); }

/// psi(|x| = r) for psi^(zeta) = packet_bump(|zeta|, c), by the Hankel transform.
inline double packet_profile_at(double r, double c, int dim) {
  auto integrand = [&](double rho) {
    const double b = packet_bump(rho, c);
    if (dim == 2) return b * kTwoPi * std::cyl_bessel_j(0.0, r * rho) * rho;
    const double x = r * rho;
    const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
    return b * 4.0 * kPi * sinc * rho * rho;
  };
  return integrate_composite(integrand, 0.0, c, 64, 8) / std::pow(kTwoPi, dim);
}

/// Caps of level k whose support lies in the cone V of the spec.
inline std::vector<std::size_t> cone_caps(const PacketFamilySpec& spec, const CapSystem& caps) {
  return caps.inside_cone(spec.axis, spec.aperture);
}

/// Field for one level. Packets are centered at the origin.
inline SampledField make_family(const PacketFamilySpec& spec, int k, const CapSystem& caps) {
  spec.validate();
  const PeriodicGrid g = spec.grid.grid(k, spec.dim);
  if (caps.dim() != spec.dim || caps.level() != k) throw GridMismatch("make_family: cap system does not match the level");
  std::vector<Vec> centers;
  if (spec.kind == FamilyKind::single_packet) {
    centers.push_back(spec.axis);
  } else {
    for (auto nu : cone_caps(spec, caps)) centers.push_back(caps.center(nu));
    if (centers.empty()) throw DomainError("make_family: no cap of level " + std::to_string(k) + " fits inside the cone");
  }
  const double K = std::ldexp(1.0, k), Kh = std::pow(2.0, 0.5 * k);
  const bool unit = spec.kind == FamilyKind::unit_scale;
  const double c = unit ? spec.unit_radius : spec.focusing_radius;
  if (K * (1.0 + (unit ? c / K : c)) >= g.nyquist())
    throw ResolutionError("make_family: packet band exceeds the grid Nyquist frequency");
  const double norm_const = 1.0 / packet_profile_at(1.0, c, spec.dim);  // psi(|x| = 1) = 1
  const double amp = norm_const * (unit ? 1.0 : std::pow(2.0, -0.5 * k * (spec.dim + 1))) / g.volume();

  double max_band = 0.0;
  Spectrum s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec eta = g.frequency(i);
    cplx acc{0.0, 0.0};
    for (const auto& nu : centers) {
      const Vec d = eta - K * nu;
      double rho;
      if (unit) {
        rho = norm(d);
      } else {
        const double along = dot(d, nu);
        const Vec perp = d - along * nu;
        rho = std::sqrt(std::pow(along / K, 2) + std::pow(norm(perp) / Kh, 2));
      }
      if (rho < c) acc += amp * packet_bump(rho, c);
    }
    if (acc != cplx{0.0, 0.0}) {
      s.coeffs[i] = acc;
      const Mode m = g.mode(i);
      for (int a = 0; a < g.dim(); ++a)
        if (m[a] == -g.points() / 2) throw ResolutionError("make_family: packet reaches the Nyquist mode");
      max_band = std::max(max_band, norm(eta));
    }
  }
  if (max_band >= g.nyquist()) throw ResolutionError("make_family: packet band exceeds the grid Nyquist frequency");
  return inverse(std::move(s), max_band);
}

inline SampledField make_family(const PacketFamilySpec& spec, int k) { return make_family(spec, k, build_caps(k, spec.dim)); }

/// Complex Gaussian coefficients on r_lo <= |xi| <= r_hi with smooth tapers
/// of relative width 1/4 at both edges.
inline SampledField random_band_field(const PeriodicGrid& g, double r_lo, double r_hi, std::mt19937_64& rng) {
  require(r_hi > r_lo && r_lo >= 0.0, "random_band_field: need 0 <= r_lo < r_hi");
  if (r_hi >= g.nyquist()) throw ResolutionError("random_band_field: band exceeds the grid Nyquist frequency");
  std::normal_distribution<double> gauss;
  Spectrum s(g);
  const double dlo = 0.25 * std::max(r_lo, g.freq_step()), dhi = 0.25 * r_hi;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double re = gauss(rng), im = gauss(rng);
    const double r = norm(g.frequency(i));
    if (r < r_lo || r > r_hi) continue;
    const double taper = smooth_step((r - r_lo) / dlo) * smooth_step((r_hi - r) / dhi);
    s.coeffs[i] = taper * cplx(re, im);
  }
  return inverse(std::move(s), r_hi);
}

/// Random field on the level-k annulus 2^{k-1} <= |xi| <= 2^{k+1}.
inline SampledField random_annulus_field(const PeriodicGrid& g, int k, std::mt19937_64& rng) {
  return random_band_field(g, std::ldexp(1.0, k - 1), std::ldexp(1.0, k + 1), rng);
}

/// Slope of log2(values) against k.
struct SlopeReport {
  std::string quantity;
  std::vector<int> ks;
  std::vector<double> log2_values;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double predicted = 0.0;
  double tolerance = 0.1;
  double residual_cap = 0.05;
  bool pass = false;
};

inline SlopeReport make_slope_report(std::string quantity, const std::vector<int>& ks, const std::vector<double>& values,
                                     double predicted, double tolerance = 0.1, double residual_cap = 0.05) {
  SlopeReport r;
  r.quantity = std::move(quantity);
  r.ks = ks;
  r.predicted = predicted;
  r.tolerance = tolerance;
  r.residual_cap = residual_cap;
  std::vector<double> x;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(values[i] > 0.0)) throw DomainError("slope report '" + r.quantity + "': nonpositive value");
    x.push_back(ks[i]);
    r.log2_values.push_back(std::log2(values[i]));
  }
  const LinearFit fit = least_squares(x, r.log2_values);
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  r.residual = fit.residual;
  r.pass = std::abs(r.slope - predicted) <= tolerance && r.residual <= residual_cap;
  return r;
}

inline void to_json(nlohmann::json& j, const SlopeReport& r) {
  j = nlohmann::json{{"quantity", r.quantity}, {"k", r.ks},           {"log2_values", r.log2_values},
                     {"slope", r.slope},       {"intercept", r.intercept}, {"residual", r.residual},
                     {"predicted", r.predicted}, {"tolerance", r.tolerance}, {"residual_cap", r.residual_cap},
                     {"pass", r.pass}};
}

/// Predicted log2-slope of hfio_norm(family_k, s, p).
inline double predicted_sharpness_slope(FamilyKind kind, int n, double s, double p) {
  if (kind == FamilyKind::unit_scale) return s + (n - 1) / 4.0;
  return s + 0.5 * (n - 1) * (0.5 - 1.0 / p) - 1.0 / p;
}

struct SharpnessResult {
  SlopeReport focusing;
  SlopeReport unit_scale;
};

/// Slopes of hfio_norm(family_k, s, p) for both families over spec.ks.
inline SharpnessResult sharpness_experiment(PacketFamilySpec spec, double s, double p, const WavePacketFrame& frame,
                                            const DirectionSet& dirs, double tolerance = 0.1) {
  SharpnessResult out;
  for (FamilyKind kind : {FamilyKind::focusing, FamilyKind::unit_scale}) {
    spec.kind = kind;
    std::vector<double> vals;
    for (int k : spec.ks) vals.push_back(hfio_norm(make_family(spec, k), s, p, frame, dirs));
    auto rep = make_slope_report(to_string(kind) + "_hfio_norm", spec.ks, vals,
                                 predicted_sharpness_slope(kind, spec.dim, s, p), tolerance);
    (kind == FamilyKind::focusing ? out.focusing : out.unit_scale) = std::move(rep);
  }
  return out;
}

}  // namespace hfio
