#pragma once

// Periodic grids, discrete Fourier transforms, Fourier multipliers and
// Lebesgue/Sobolev norms.
//
// Fourier convention (used everywhere in the library):
//   f^(xi) = int f(x) e^{-i x.xi} dx,   f(x) = (2 pi)^{-n} int f^(xi) e^{i x.xi} dxi.
// On a grid of period L with N points per axis the field is stored as
// physical samples; its coefficients c_m satisfy f(x) = sum_m c_m e^{i xi_m.x}
// with xi_m = 2 pi m / L, so f^(xi_m) = L^n c_m for fields supported well
// inside the period.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "hfio/errors.hpp"

namespace hfio {

using cplx = std::complex<double>;
using Vec = std::array<double, 3>;
using Mode = std::array<int, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Japanese bracket <xi> = (1 + |xi|^2)^{1/2}.
inline double bracket(double r) { return std::sqrt(1.0 + r * r); }

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Uniform periodic grid on [0, L)^n, n in {2, 3}. Sample j sits at
/// x = j L / N (per axis); frequency index m ranges over -N/2 .. N/2 - 1.
class PeriodicGrid {
public:
  PeriodicGrid() = default;
  PeriodicGrid(int dim, int points, double period) : dim_(dim), points_(points), period_(period) {
    require(dim == 2 || dim == 3, "PeriodicGrid: dimension must be 2 or 3");
    require(points >= 8 && is_power_of_two(points), "PeriodicGrid: points per axis must be a power of two >= 8");
    require(period > 0.0 && std::isfinite(period), "PeriodicGrid: period must be positive");
  }

  int dim() const { return dim_; }
  int points() const { return points_; }
  double period() const { return period_; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim_; ++d) s *= static_cast<std::size_t>(points_);
    return s;
  }
  double spacing() const { return period_ / points_; }
  double freq_step() const { return kTwoPi / period_; }
  /// Largest representable frequency per axis, pi N / L.
  double nyquist() const { return kPi * points_ / period_; }
  double cell_volume() const { return std::pow(spacing(), dim_); }
  double freq_cell() const { return std::pow(freq_step(), dim_); }
  double volume() const { return std::pow(period_, dim_); }

  std::array<int, 3> axis_index(std::size_t idx) const {
    std::array<int, 3> out{0, 0, 0};
    for (int d = dim_ - 1; d >= 0; --d) {
      out[d] = static_cast<int>(idx % points_);
      idx /= points_;
    }
    return out;
  }
  std::size_t flat_index(const std::array<int, 3>& j) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim_; ++d) {
      int v = j[d] % points_;
      if (v < 0) v += points_;
      idx = idx * points_ + static_cast<std::size_t>(v);
    }
    return idx;
  }
  Mode mode(std::size_t idx) const {
    auto j = axis_index(idx);
    Mode m{0, 0, 0};
    for (int d = 0; d < dim_; ++d) m[d] = j[d] < points_ / 2 ? j[d] : j[d] - points_;
    return m;
  }
  Vec position(std::size_t idx) const {
    auto j = axis_index(idx);
    Vec x{0, 0, 0};
    for (int d = 0; d < dim_; ++d) x[d] = j[d] * spacing();
    return x;
  }
  Vec frequency(std::size_t idx) const {
    auto m = mode(idx);
    Vec xi{0, 0, 0};
    for (int d = 0; d < dim_; ++d) xi[d] = m[d] * freq_step();
    return xi;
  }
  bool same_as(const PeriodicGrid& o) const {
    return dim_ == o.dim_ && points_ == o.points_ && std::abs(period_ - o.period_) <= 1e-12 * period_;
  }

private:
  int dim_ = 2;
  int points_ = 8;
  double period_ = kTwoPi;
};

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
  if (!a.same_as(b)) throw GridMismatch(std::string(where) + ": fields live on different grids");
}

/// Complex samples on a periodic grid with an optional declared band limit.
struct SampledField {
  PeriodicGrid grid;
  std::vector<cplx> values;
  std::optional<double> band_limit;

  SampledField() = default;
  explicit SampledField(const PeriodicGrid& g, std::optional<double> band = std::nullopt)
      : grid(g), values(g.size(), cplx{0.0, 0.0}), band_limit(band) {}
  SampledField(const PeriodicGrid& g, std::vector<cplx> v, std::optional<double> band = std::nullopt)
      : grid(g), values(std::move(v)), band_limit(band) {
    if (values.size() != grid.size()) throw GridMismatch("SampledField: sample count must equal N^n");
  }

  template <class F>
  static SampledField from_function(const PeriodicGrid& g, F&& fn, std::optional<double> band = std::nullopt) {
    SampledField out(g, band);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = fn(g.position(i));
    return out;
  }

  SampledField& operator+=(const SampledField& o) {
    require_same_grid(grid, o.grid, "SampledField::operator+=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    band_limit = (band_limit && o.band_limit) ? std::optional<double>(std::max(*band_limit, *o.band_limit))
                                              : std::nullopt;
    return *this;
  }
  SampledField& operator-=(const SampledField& o) {
    require_same_grid(grid, o.grid, "SampledField::operator-=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    band_limit = (band_limit && o.band_limit) ? std::optional<double>(std::max(*band_limit, *o.band_limit))
                                              : std::nullopt;
    return *this;
  }
  SampledField& operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
  }
};

inline SampledField operator+(SampledField a, const SampledField& b) { return a += b; }
inline SampledField operator-(SampledField a, const SampledField& b) { return a -= b; }
inline SampledField operator*(cplx s, SampledField a) { return a *= s; }

/// Fourier coefficients c_m of a field: f(x) = sum_m c_m e^{i xi_m . x}.
struct Spectrum {
  PeriodicGrid grid;
  std::vector<cplx> coeffs;

  Spectrum() = default;
  explicit Spectrum(const PeriodicGrid& g) : grid(g), coeffs(g.size(), cplx{0.0, 0.0}) {}
};

namespace detail {

class FftPlans {
public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }
  fftw_plan get(int dim, int points, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(dim, points, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::array<int, 3> n{points, points, points};
    fftw_plan plan = fftw_plan_dft(dim, n.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }
  ~FftPlans() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

private:
  FftPlans() = default;
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void fft_inplace(const PeriodicGrid& g, std::vector<cplx>& data, int sign) {
  fftw_plan plan = FftPlans::instance().get(g.dim(), g.points(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// Coefficients of a field (forward DFT scaled by N^{-n}).
inline Spectrum forward(const SampledField& f) {
  Spectrum s(f.grid);
  s.coeffs = f.values;
  detail::fft_inplace(f.grid, s.coeffs, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(f.grid.size());
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

/// Samples from coefficients.
inline SampledField inverse(Spectrum s, std::optional<double> band = std::nullopt) {
  detail::fft_inplace(s.grid, s.coeffs, FFTW_BACKWARD);
  return SampledField(s.grid, std::move(s.coeffs), band);
}

/// In-place synthesis used by hot loops that reuse one buffer.
inline void synthesize_inplace(const PeriodicGrid& g, std::vector<cplx>& coeffs) {
  detail::fft_inplace(g, coeffs, FFTW_BACKWARD);
}

/// Largest |xi| carrying a coefficient above rel_tol * max |c|.
inline double measured_band_limit(const Spectrum& s, double rel_tol = 1e-12) {
  double cmax = 0.0;
  for (const auto& c : s.coeffs) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) return 0.0;
  double band = 0.0;
  for (std::size_t i = 0; i < s.coeffs.size(); ++i)
    if (std::abs(s.coeffs[i]) > rel_tol * cmax) band = std::max(band, norm(s.grid.frequency(i)));
  return band;
}

/// Metadata carried by a multiplier; all bounds refer to |xi|.
struct MultiplierInfo {
  bool radial = false;
  std::optional<double> support_outer;  // symbol vanishes for |xi| > support_outer
  std::optional<double> support_inner;  // symbol vanishes for |xi| < support_inner
  std::optional<double> homogeneity;    // degree, when homogeneous away from 0
  std::string name;
};

/// Symbol xi -> m(xi), total on every lattice frequency (including xi = 0).
class FourierMultiplier {
public:
  using Symbol = std::function<cplx(const Vec&)>;

  FourierMultiplier() : symbol_([](const Vec&) { return cplx{1.0, 0.0}; }) { info_.radial = true; info_.name = "identity"; }
  FourierMultiplier(Symbol s, MultiplierInfo info) : symbol_(std::move(s)), info_(std::move(info)) {}

  template <class Profile>
  static FourierMultiplier radial(Profile profile, MultiplierInfo info = {}) {
    info.radial = true;
    return FourierMultiplier([profile](const Vec& xi) { return cplx(profile(norm(xi))); }, std::move(info));
  }

  cplx operator()(const Vec& xi) const { return symbol_(xi); }
  const MultiplierInfo& info() const { return info_; }

  /// Pointwise product of symbols.
  friend FourierMultiplier operator*(const FourierMultiplier& a, const FourierMultiplier& b) {
    MultiplierInfo info;
    info.radial = a.info_.radial && b.info_.radial;
    if (a.info_.support_outer && b.info_.support_outer)
      info.support_outer = std::min(*a.info_.support_outer, *b.info_.support_outer);
    else
      info.support_outer = a.info_.support_outer ? a.info_.support_outer : b.info_.support_outer;
    info.name = a.info_.name + "*" + b.info_.name;
    return FourierMultiplier([sa = a.symbol_, sb = b.symbol_](const Vec& xi) { return sa(xi) * sb(xi); },
                             std::move(info));
  }

private:
  Symbol symbol_;
  MultiplierInfo info_;
};

inline void apply_inplace(Spectrum& s, const FourierMultiplier& m) {
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= m(s.grid.frequency(i));
}

inline std::optional<double> combined_band(std::optional<double> field_band, const FourierMultiplier& m) {
  if (field_band && m.info().support_outer) return std::min(*field_band, *m.info().support_outer);
  return field_band ? field_band : m.info().support_outer;
}

/// m(D) f.
inline SampledField apply_multiplier(const SampledField& f, const FourierMultiplier& m) {
  Spectrum s = forward(f);
  apply_inplace(s, m);
  return inverse(std::move(s), combined_band(f.band_limit, m));
}

inline void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw DomainError("exponent p must lie in (1, inf); endpoints are outside the numeric scope");
}

/// sum_j |f(x_j)|^p (L/N)^n without the final root.
inline double lp_norm_pow(std::span<const cplx> values, double p, double cell) {
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& v : values) acc += std::norm(v);
  } else if (p == 4.0) {
    for (const auto& v : values) {
      const double a = std::norm(v);
      acc += a * a;
    }
  } else if (p == 6.0) {
    for (const auto& v : values) {
      const double a = std::norm(v);
      acc += a * a * a;
    }
  } else {
    for (const auto& v : values) acc += std::pow(std::abs(v), p);
  }
  return acc * cell;
}

/// Riemann-sum L^p norm on the periodic grid, p in (1, inf).
inline double lp_norm(const SampledField& f, double p) {
  require_exponent(p);
  return std::pow(lp_norm_pow(f.values, p, f.grid.cell_volume()), 1.0 / p);
}

/// L^2 norm from coefficients: ||f||_2^2 = L^n sum |c_m|^2.
inline double l2_norm_from_spectrum(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s.coeffs) acc += std::norm(c);
  return std::sqrt(acc * s.grid.volume());
}

inline FourierMultiplier bessel_potential(double s) {
  MultiplierInfo info;
  info.name = "bessel_potential";
  info.homogeneity = s;
  return FourierMultiplier::radial([s](double r) { return std::pow(1.0 + r * r, 0.5 * s); }, info);
}

/// ||<D>^s f||_{L^p}.
inline double sobolev_norm(const SampledField& f, double s, double p) {
  require_exponent(p);
  if (s == 0.0) return lp_norm(f, p);
  return lp_norm(apply_multiplier(f, bessel_potential(s)), p);
}

// ---------------------------------------------------------------------------
// Smooth building blocks.

/// C^infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

/// Radial cutoff equal to 1 on [0, inner] and 0 on [outer, inf).
inline double plateau_cutoff(double r, double inner, double outer) {
  return 1.0 - smooth_step((r - inner) / (outer - inner));
}

/// Littlewood-Paley piece phi_k: radial, supported in 2^{k-1} <= |xi| <= 2^{k+1}
/// (|xi| <= 2 for k = 0), with sum_k phi_k = 1.
inline FourierMultiplier littlewood_paley(int k) {
  require(k >= 0, "littlewood_paley: level must be nonnegative");
  MultiplierInfo info;
  info.name = "littlewood_paley_" + std::to_string(k);
  info.support_outer = std::ldexp(1.0, k + 1);
  if (k > 0) info.support_inner = std::ldexp(1.0, k - 1);
  auto beta = [](double r) { return plateau_cutoff(r, 1.0, 2.0); };
  if (k == 0) return FourierMultiplier::radial(beta, info);
  const double scale = std::ldexp(1.0, k);
  return FourierMultiplier::radial([beta, scale](double r) { return beta(r / scale) - beta(2.0 * r / scale); },
                                   info);
}

/// Widened companion: equals 1 on supp phi_k, supported in [2^{k-2}, 2^{k+2}].
inline FourierMultiplier littlewood_paley_wide(int k) {
  require(k >= 0, "littlewood_paley_wide: level must be nonnegative");
  MultiplierInfo info;
  info.name = "littlewood_paley_wide_" + std::to_string(k);
  info.support_outer = std::ldexp(1.0, k + 2);
  auto beta = [](double r) { return plateau_cutoff(r, 1.0, 2.0); };
  const double hi = std::ldexp(1.0, k + 1);
  if (k == 0) return FourierMultiplier::radial([beta, hi](double r) { return beta(r / hi); }, info);
  info.support_inner = std::ldexp(1.0, k - 2);
  const double lo = std::ldexp(1.0, k - 2);
  return FourierMultiplier::radial([beta, hi, lo](double r) { return beta(r / hi) - beta(r / lo); }, info);
}

/// Spectral interpolation: evaluates sum_m c_m e^{i xi_m . x} at an off-grid point.
inline cplx evaluate_at(const Spectrum& s, const Vec& x, double rel_tol = 0.0) {
  double cmax = 0.0;
  if (rel_tol > 0.0)
    for (const auto& c : s.coeffs) cmax = std::max(cmax, std::abs(c));
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const cplx c = s.coeffs[i];
    if (c == cplx{0.0, 0.0} || std::abs(c) <= rel_tol * cmax) continue;
    acc += c * std::polar(1.0, dot(s.grid.frequency(i), x));
  }
  return acc;
}

/// Zero-padded copy of a field on a grid refined by `factor` (same period).
inline SampledField refine(const SampledField& f, int factor) {
  require(is_power_of_two(factor), "refine: factor must be a power of two");
  PeriodicGrid fine(f.grid.dim(), f.grid.points() * factor, f.grid.period());
  Spectrum coarse = forward(f);
  Spectrum out(fine);
  for (std::size_t i = 0; i < coarse.coeffs.size(); ++i) {
    Mode m = coarse.grid.mode(i);
    bool nyq = false;
    for (int d = 0; d < f.grid.dim(); ++d) nyq = nyq || (m[d] == -f.grid.points() / 2);
    if (nyq) continue;  // drop the unpaired Nyquist mode
    out.coeffs[fine.flat_index({m[0], m[1], m[2]})] = coarse.coeffs[i];
  }
  return inverse(std::move(out), f.band_limit);
}

}  // namespace hfio
