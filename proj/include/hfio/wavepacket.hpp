#pragma once

// Dyadic-parabolic wave packets phi_omega and their reproducing multiplier.
//
//   phi_{omega,sigma}(xi) = c_sigma phi((xi^ - omega) / sqrt(sigma)),
//   c_sigma = ( int_{S^{n-1}} phi((e_1 - nu) / sqrt(sigma))^2 dnu )^{-1/2},
//   phi_omega(xi) = int_0^4 Psi(sigma xi) phi_{omega,sigma}(xi) dsigma / sigma.
//
// phi_omega(xi) depends only on r = |xi| and d = |xi^ - omega|; the frame
// evaluates that two-variable function either by direct quadrature in
// log(sigma) or through a bicubic table used by the bulk norm routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hfio/errors.hpp"
#include "hfio/quadrature.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

/// Radial cutoff: 1 on [0, r0], 0 on [1, inf), monotone in between.
class BumpProfile {
public:
  explicit BumpProfile(double plateau = 0.5) : plateau_(plateau) {
    require(plateau > 0.0 && plateau < 1.0, "BumpProfile: plateau radius must lie in (0, 1)");
  }
  double operator()(double r) const { return plateau_cutoff(r, plateau_, 1.0); }
  double plateau() const { return plateau_; }
  /// The profile is C^infinity; this is the number of derivatives the tests verify.
  int smoothness() const { return 4; }

private:
  double plateau_;
};

/// The reference annulus seed exp(1 - 1/(1 - log2(r)^2)) on (1/2, 2).
inline double reference_annulus_seed(double r) {
  if (r <= 0.5 || r >= 2.0) return 0.0;
  const double t = std::log2(r);
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

/// Psi, supported in [1/2, 2], with int_0^inf Psi(sigma r)^2 dsigma/sigma = 1.
class AnnulusProfile {
public:
  AnnulusProfile(std::function<double(double)> seed, double scale) : seed_(std::move(seed)), scale_(scale) {}
  double operator()(double r) const { return (r <= 0.5 || r >= 2.0) ? 0.0 : scale_ * seed_(r); }
  double scale() const { return scale_; }

private:
  std::function<double(double)> seed_;
  double scale_;
};

/// int_0^inf g(u)^2 du/u for g supported in [1/2, 2], by composite
/// Gauss-Legendre in log u.
template <class G>
double log_square_integral(const G& g, int panels = 64) {
  return integrate_composite(
      [&](double t) {
        const double v = g(std::exp(t));
        return v * v;
      },
      std::log(0.5), std::log(2.0), panels, 8);
}

/// Normalizes an annulus seed so that the dsigma/sigma identity holds.
inline AnnulusProfile build_annulus_profile(std::function<double(double)> seed) {
  const double mass = log_square_integral(seed);
  if (!(mass >= 1e-12)) throw DomainError("build_annulus_profile: seed has (numerically) zero L^2(du/u) mass");
  return AnnulusProfile(std::move(seed), 1.0 / std::sqrt(mass));
}

/// Quadrature nodes omega_i on S^{n-1} with weights summing to the sphere measure.
struct DirectionSet {
  int dim = 2;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  bool equispaced_circle = false;  // nodes[i] at angle 2 pi i / size()

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// Equispaced nodes on the circle, starting at e_1.
  static DirectionSet circle(int count) {
    require(count >= 3, "DirectionSet::circle: need at least 3 nodes");
    DirectionSet d;
    d.dim = 2;
    for (int i = 0; i < count; ++i) {
      const double a = kTwoPi * i / count;
      d.nodes.push_back({std::cos(a), std::sin(a), 0.0});
      d.weights.push_back(kTwoPi / count);
    }
    d.equispaced_circle = true;
    return d;
  }

  /// Fibonacci lattice on S^2 with equal weights 4 pi / count.
  static DirectionSet fibonacci_sphere(int count) {
    require(count >= 4, "DirectionSet::fibonacci_sphere: need at least 4 nodes");
    DirectionSet d;
    d.dim = 3;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      d.nodes.push_back({rho * std::cos(a), rho * std::sin(a), z});
      d.weights.push_back(4.0 * kPi / count);
    }
    return d;
  }

  static DirectionSet for_dimension(int dim, int count) {
    return dim == 2 ? circle(count) : fibonacci_sphere(count);
  }
};

inline double sphere_measure(int dim) { return dim == 2 ? kTwoPi : 4.0 * kPi; }

/// Direction count tied to the finest dyadic level: at least 8 * 2^{k/2},
/// rounded up to a power of two on the circle.
inline int recommended_direction_count(int dim, int max_level) {
  const double base = 8.0 * std::pow(2.0, 0.5 * max_level);
  if (dim == 2) {
    int n = 8;
    while (n < 2 * base) n *= 2;
    return n;
  }
  return static_cast<int>(std::ceil(base * base));
}

/// c_sigma evaluated with an explicit direction quadrature.
inline double c_sigma(double sigma, const BumpProfile& phi, const DirectionSet& dirs) {
  require(sigma > 0.0, "c_sigma: sigma must be positive");
  const Vec e1{1.0, 0.0, 0.0};
  const double root = std::sqrt(sigma);
  double acc = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double v = phi(norm(e1 - dirs.nodes[i]) / root);
    acc += dirs.weights[i] * v * v;
  }
  if (!(acc > 0.0))
    throw ResolutionError("c_sigma: integrand vanishes at every node; sigma too small for the direction set");
  return 1.0 / std::sqrt(acc);
}

struct FrameConfig {
  int dim = 2;
  double plateau = 0.5;       // r0 of the bump phi
  double max_radius = 1024.0; // largest |xi| served by the fast table
  int sigma_panels = 64;      // Gauss-Legendre panels in log(sigma)
  int sigma_order = 4;
  int table_per_unit = 64;    // table nodes per unit of log r
  int table_angular = 256;    // table nodes in the normalized angle
  int table_sigma_panels = 24; // log(sigma) panels used while filling the table
  bool build_table = true;    // false: packet_fast falls back to quadrature
};

class WavePacketFrame {
public:
  explicit WavePacketFrame(FrameConfig cfg = {})
      : cfg_(cfg), bump_(cfg.plateau), annulus_(build_annulus_profile(reference_annulus_seed)),
        rule_(cfg.sigma_order) {
    require(cfg.dim == 2 || cfg.dim == 3, "WavePacketFrame: dimension must be 2 or 3");
    require(cfg.max_radius >= 1.0, "WavePacketFrame: max_radius must be >= 1");
    build_c_table();
    growth_ = (cfg_.dim - 1) / 4.0;
    if (cfg_.build_table) build_packet_table();
  }

  const FrameConfig& config() const { return cfg_; }
  int dim() const { return cfg_.dim; }
  const BumpProfile& bump() const { return bump_; }
  const AnnulusProfile& annulus() const { return annulus_; }

  /// c_sigma by reduction to a one-dimensional polar-angle integral.
  double c_sigma_direct(double sigma) const {
    require(sigma > 0.0, "c_sigma: sigma must be positive");
    const double root = std::sqrt(sigma);
    const double theta_max = root >= 2.0 ? kPi : 2.0 * std::asin(root / 2.0);
    const int dim = cfg_.dim;
    const double acc = integrate_composite(
        [&](double th) {
          const double v = bump_(2.0 * std::sin(0.5 * th) / root);
          return dim == 2 ? 2.0 * v * v : kTwoPi * v * v * std::sin(th);
        },
        0.0, theta_max, 64, 8);
    if (!(acc > 0.0)) throw ResolutionError("c_sigma: vanishing normalization integral");
    return 1.0 / std::sqrt(acc);
  }

  /// c_sigma from the precomputed table (cubic interpolation in log sigma).
  double c_sigma(double sigma) const {
    const double t = std::log(sigma);
    if (t >= c_t_hi_) return c_const_;
    if (t < c_t_lo_) return c_sigma_direct(sigma);
    const double u = (t - c_t_lo_) / c_h_;
    return std::exp(cubic_1d(c_log_, u));
  }

  /// phi_omega as a function of r = |xi| and d = |xi^ - omega|, direct quadrature.
  double packet_exact(double r, double d) const { return packet_quadrature(r, d, cfg_.sigma_panels); }

  double packet_quadrature(double r, double d, int panels) const {
    if (r <= 0.125) return 0.0;
    const double s_lo = std::max(0.5 / r, d * d);
    const double s_hi = std::min(2.0 / r, 4.0);
    if (s_lo >= s_hi) return 0.0;
    return integrate_composite(
        [&](double t) {
          const double s = std::exp(t);
          return annulus_(s * r) * c_sigma(s) * bump_(d / std::sqrt(s));
        },
        std::log(s_lo), std::log(s_hi), panels, rule_);
  }

  /// Table-backed evaluation of the same function; falls back to quadrature
  /// outside the tabulated radius range.
  double packet_fast(double r, double d) const {
    if (r <= 0.125) return 0.0;
    if (r > cfg_.max_radius || !cfg_.build_table) return packet_exact(r, d);
    const double dmax = r < 0.5 ? 2.0 : std::sqrt(2.0 / r);
    if (d >= dmax) return 0.0;
    const double D = d / dmax;
    const double x = std::log(r);
    const Table& tab = r < 0.5 ? low_ : high_;
    const double u = (x - tab.x0) / tab.hx;
    const double v = D * (tab.nd - 1);
    return std::max(0.0, bicubic(tab, u, v)) * std::pow(r, growth_);
  }

  double packet(const Vec& omega, const Vec& xi) const {
    const double r = norm(xi);
    if (r == 0.0) return 0.0;
    return packet_exact(r, norm((1.0 / r) * xi - omega));
  }

  /// phi_omega(D).
  FourierMultiplier phi_omega(const Vec& omega) const {
    if (std::abs(norm(omega) - 1.0) > 1e-12) throw DomainError("phi_omega: direction must be a unit vector");
    MultiplierInfo info;
    info.name = "phi_omega";
    info.support_inner = 0.125;
    return FourierMultiplier([this, omega](const Vec& xi) { return cplx(packet(omega, xi)); }, info);
  }

  /// q: radial, 1 on |xi| <= 2, supported in |xi| <= 4.
  static double q_cutoff(double r) { return plateau_cutoff(r, 2.0, 4.0); }
  static FourierMultiplier q_multiplier() {
    MultiplierInfo info;
    info.name = "q";
    info.support_outer = 4.0;
    return FourierMultiplier::radial(q_cutoff, info);
  }

  /// sum_i w_i phi_{omega_i}(xi) using the fast table.
  double direction_sum(const Vec& xi, const DirectionSet& dirs) const {
    const double r = norm(xi);
    if (r == 0.0) return 0.0;
    const Vec hat = (1.0 / r) * xi;
    double acc = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) acc += dirs.weights[i] * packet_fast(r, norm(hat - dirs.nodes[i]));
    return acc;
  }

  /// int_{S^{n-1}} phi_omega(r e_1) d omega by polar-angle quadrature (no direction set).
  double sphere_integral(double r, int panels = 64) const {
    if (r <= 0.125) return 0.0;
    const double reach = angular_reach(r);
    const double theta_max = reach >= 2.0 ? kPi : 2.0 * std::asin(reach / 2.0);
    const int dim = cfg_.dim;
    const double acc = integrate_composite(
        [&](double th) {
          const double v = packet_fast(r, 2.0 * std::sin(0.5 * th));
          return dim == 2 ? 2.0 * v : kTwoPi * v * std::sin(th);
        },
        0.0, theta_max, panels, rule_);
    return acc;
  }

  /// Largest angular reach |xi^ - omega| of phi_omega at radius r.
  static double angular_reach(double r) { return r < 0.5 ? 2.0 : std::sqrt(2.0 / r); }

private:
  struct Table {
    double x0 = 0.0, hx = 1.0;
    int nx = 0, nd = 0;
    std::vector<double> data;  // row-major [ix][id]
    double at(int ix, int id) const {
      ix = std::clamp(ix, 0, nx - 1);
      id = std::clamp(id, 0, nd - 1);
      return data[static_cast<std::size_t>(ix) * nd + id];
    }
  };

  static void lagrange4(double frac, double w[4]) {
    // Cubic Lagrange weights for nodes -1, 0, 1, 2 at position frac in [0, 1].
    const double t = frac;
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  }

  static int base_index(double u, int n) {
    int i = static_cast<int>(std::floor(u));
    return std::clamp(i, 1, std::max(1, n - 3));
  }

  static double cubic_1d(const std::vector<double>& y, double u) {
    const int n = static_cast<int>(y.size());
    const int i = base_index(u, n);
    double w[4];
    lagrange4(u - i, w);
    return w[0] * y[i - 1] + w[1] * y[i] + w[2] * y[i + 1] + w[3] * y[i + 2];
  }

  static double bicubic(const Table& t, double u, double v) {
    const int i = base_index(u, t.nx);
    const int j = base_index(v, t.nd);
    double wu[4], wv[4];
    lagrange4(u - i, wu);
    lagrange4(v - j, wv);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
      double row = 0.0;
      for (int b = 0; b < 4; ++b) row += wv[b] * t.at(i - 1 + a, j - 1 + b);
      acc += wu[a] * row;
    }
    return acc;
  }

  void build_c_table() {
    // c_sigma is constant once the bump equals 1 on the whole sphere.
    const double s_flat = std::pow(2.0 / cfg_.plateau, 2);
    c_const_ = 1.0 / std::sqrt(sphere_measure(cfg_.dim));
    c_t_hi_ = std::log(s_flat);
    c_t_lo_ = std::log(0.5 / (cfg_.max_radius * 2.0)) - 0.1;
    c_h_ = 1.0 / 256.0;
    const int n = static_cast<int>(std::ceil((c_t_hi_ - c_t_lo_) / c_h_)) + 4;
    c_log_.resize(n);
    for (int i = 0; i < n; ++i) c_log_[i] = std::log(c_sigma_direct(std::exp(c_t_lo_ + i * c_h_)));
  }

  void fill_table(Table& t, double r_lo, double r_hi, bool low) {
    t.x0 = std::log(r_lo);
    const double x1 = std::log(r_hi);
    t.nx = std::max(8, static_cast<int>(std::ceil((x1 - t.x0) * cfg_.table_per_unit)) + 1);
    t.hx = (x1 - t.x0) / (t.nx - 1);
    t.nd = cfg_.table_angular + 1;
    t.data.assign(static_cast<std::size_t>(t.nx) * t.nd, 0.0);
    for (int ix = 0; ix < t.nx; ++ix) {
      const double r = std::exp(t.x0 + ix * t.hx);
      const double dmax = low ? 2.0 : std::sqrt(2.0 / r);
      const double scale = std::pow(r, -growth_);
      for (int id = 0; id < t.nd; ++id) {
        const double d = dmax * id / (t.nd - 1);
        t.data[static_cast<std::size_t>(ix) * t.nd + id] = packet_quadrature(r, d, cfg_.table_sigma_panels) * scale;
      }
    }
  }

  void build_packet_table() {
    fill_table(low_, 0.125, 0.5, true);
    fill_table(high_, 0.5, cfg_.max_radius * 1.05, false);
  }

  FrameConfig cfg_;
  BumpProfile bump_;
  AnnulusProfile annulus_;
  GaussLegendre rule_;
  double c_const_ = 0.0, c_t_lo_ = 0.0, c_t_hi_ = 0.0, c_h_ = 1.0;
  std::vector<double> c_log_;
  double growth_ = 0.25;
  Table low_, high_;
};

/// m(D) with m = blend(|xi|) / sum_i w_i phi_{omega_i}(xi): blend is 0 below
/// |xi| = 1/4 and 1 above 1/2.
inline FourierMultiplier reproducing_multiplier(const WavePacketFrame& frame, const DirectionSet& dirs) {
  MultiplierInfo info;
  info.name = "reproducing_m";
  info.radial = true;
  info.support_inner = 0.25;
  info.homogeneity = (frame.dim() - 1) / 4.0;
  return FourierMultiplier(
      [&frame, dirs](const Vec& xi) {
        const double r = norm(xi);
        if (r <= 0.25) return cplx{0.0, 0.0};
        const double sum = frame.direction_sum(xi, dirs);
        if (sum < 1e-10) {
          if (r >= 0.5)
            throw ResolutionError("reproducing_multiplier: direction sum below 1e-10; direction set too coarse");
          return cplx{0.0, 0.0};
        }
        return cplx(smooth_step((r - 0.25) / 0.25) / sum);
      },
      info);
}

/// Radial m(D) with m = blend(|xi|) / int phi_omega(xi) d omega computed from
/// the continuous sphere integral; pairing it with a discrete direction set
/// measures the direction quadrature.
inline FourierMultiplier reproducing_multiplier_continuous(const WavePacketFrame& frame) {
  MultiplierInfo info;
  info.name = "reproducing_m_continuous";
  info.support_inner = 0.25;
  info.homogeneity = (frame.dim() - 1) / 4.0;
  return FourierMultiplier::radial(
      [&frame](double r) {
        if (r <= 0.25) return 0.0;
        const double integral = frame.sphere_integral(r);
        if (integral < 1e-10) throw ResolutionError("reproducing_multiplier_continuous: vanishing sphere integral");
        return smooth_step((r - 0.25) / 0.25) / integral;
      },
      info);
}

}  // namespace hfio
