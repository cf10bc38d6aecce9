#pragma once

// Flat tori: chart atlases with squared partitions of unity, the chart
// operators Q and P, manifold FIO norms, half-density pullbacks and the
// cubic wave equation by Picard iteration of the Duhamel formula.
//
// On a flat torus the charts are translations, Jacobians are 1 and the
// Riemannian density is 1, so half densities reduce to functions.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/errors.hpp"
#include "hfio/exponents.hpp"
#include "hfio/fio_norms.hpp"
#include "hfio/fio_ops.hpp"
#include "hfio/quadrature.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

struct AtlasConfig {
  int step_points = 16;         // lattice step h in grid cells
  double plateau = 0.25;        // 1d window bump equals 1 on |u| <= plateau (u in units of h)
  double support = 0.75;        // and vanishes for |u| >= support
  int chart_points = 0;         // chart-local grid points per axis; 0 picks the smallest fitting power of two
};

/// Translation charts centered on the lattice h Z^n with windows
/// psi(x) = b(x) / sqrt(sum_kappa b(x - kappa)^2), b a tensor-product bump.
class TorusAtlas {
public:
  TorusAtlas(const PeriodicGrid& torus, AtlasConfig cfg = {}) : torus_(torus), cfg_(cfg) {
    const int N = torus.points();
    require(cfg.step_points >= 2 && N % cfg.step_points == 0, "TorusAtlas: lattice step must divide the grid");
    require(cfg.support > 0.5 && cfg.support > cfg.plateau && cfg.plateau >= 0.0,
            "TorusAtlas: window support must exceed 1/2 so the windows cover");
    const double h = step();
    require(cfg.support * h * std::sqrt(static_cast<double>(torus.dim())) <= torus.period() / 3.0 + 1e-12,
            "TorusAtlas: chart radius exceeds L/3");
    reach_ = static_cast<int>(std::ceil(cfg.support * cfg.step_points)) - 1;  // window nonzero for |offset| <= reach_
    int m = cfg.chart_points;
    if (m == 0) {
      m = 8;
      while (m < 2 * (reach_ + 1)) m *= 2;
    }
    require(is_power_of_two(m) && m >= 2 * (reach_ + 1), "TorusAtlas: chart grid too small for the window");
    chart_grid_ = PeriodicGrid(torus.dim(), m, m * torus.spacing());
    per_axis_ = N / cfg.step_points;
    build_window();
  }

  const PeriodicGrid& torus() const { return torus_; }
  const PeriodicGrid& chart_grid() const { return chart_grid_; }
  const AtlasConfig& config() const { return cfg_; }
  double step() const { return cfg_.step_points * torus_.spacing(); }
  double chart_radius() const { return cfg_.support * step() * std::sqrt(static_cast<double>(torus_.dim())); }
  std::size_t chart_count() const {
    std::size_t c = 1;
    for (int a = 0; a < torus_.dim(); ++a) c *= static_cast<std::size_t>(per_axis_);
    return c;
  }
  /// Lattice index (per axis) of chart c.
  std::array<int, 3> chart_index(std::size_t c) const {
    std::array<int, 3> j{0, 0, 0};
    for (int a = torus_.dim() - 1; a >= 0; --a) {
      j[a] = static_cast<int>(c % per_axis_);
      c /= per_axis_;
    }
    return j;
  }
  /// Window value at a per-axis cell offset from a chart center.
  double window(const std::array<int, 3>& off) const {
    double v = 1.0;
    for (int a = 0; a < torus_.dim(); ++a) {
      if (std::abs(off[a]) > reach_) return 0.0;
      v *= bump1d_[off[a] + reach_];
    }
    return v * inv_norm_at(off);
  }
  int reach() const { return reach_; }
  /// Largest number of windows that are nonzero at one point.
  int max_overlap() const {
    int per = 0;
    for (int r = 0; r < cfg_.step_points; ++r) {
      int c = 0;
      for (int j = -2 * per_axis_; j <= 2 * per_axis_; ++j)
        if (std::abs(r - j * cfg_.step_points) <= reach_ && bump1d_[std::abs(r - j * cfg_.step_points) + reach_] > 0) ++c;
      per = std::max(per, c);
    }
    return static_cast<int>(std::pow(per, torus_.dim()));
  }
  /// sum_kappa psi(x - kappa)^2 at every torus grid point.
  std::vector<double> partition_squares() const {
    std::vector<double> out(torus_.size(), 0.0);
    for (std::size_t c = 0; c < chart_count(); ++c)
      for_chart(c, [&](std::size_t tor, std::size_t, double w) { out[tor] += w * w; });
    return out;
  }

  /// Visits the window support of chart c: fn(torus index, chart-grid index, window value).
  template <class Fn>
  void for_chart(std::size_t c, Fn&& fn) const {
    const auto base = chart_index(c);
    const int dim = torus_.dim();
    const int w = 2 * reach_ + 1;
    const int total = dim == 2 ? w * w : w * w * w;
    for (int t = 0; t < total; ++t) {
      std::array<int, 3> off{0, 0, 0};
      int rem = t;
      for (int a = dim - 1; a >= 0; --a) {
        off[a] = rem % w - reach_;
        rem /= w;
      }
      const double val = window(off);
      if (val == 0.0) continue;
      std::array<int, 3> tj{0, 0, 0};
      for (int a = 0; a < dim; ++a) tj[a] = base[a] * cfg_.step_points + off[a];
      fn(torus_.flat_index(tj), chart_grid_.flat_index(off), val);
    }
  }

private:
  double inv_norm_at(const std::array<int, 3>& off) const {
    // The normalizer is periodic with the lattice; it factorizes per axis.
    double v = 1.0;
    for (int a = 0; a < torus_.dim(); ++a) {
      const int r = ((off[a] % cfg_.step_points) + cfg_.step_points) % cfg_.step_points;
      v *= inv_norm1d_[r];
    }
    return v;
  }

  void build_window() {
    const int m = cfg_.step_points;
    bump1d_.assign(2 * reach_ + 1, 0.0);
    for (int o = -reach_; o <= reach_; ++o) {
      const double u = std::abs(static_cast<double>(o) / m);
      bump1d_[o + reach_] = plateau_cutoff(u, cfg_.plateau, cfg_.support);
    }
    inv_norm1d_.assign(m, 0.0);
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      for (int j = -reach_ / m - 2; j <= reach_ / m + 2; ++j) {
        const int o = r - j * m;
        if (std::abs(o) <= reach_) s += bump1d_[o + reach_] * bump1d_[o + reach_];
      }
      if (s <= 0.0) throw DomainError("TorusAtlas: windows leave a gap");
      inv_norm1d_[r] = 1.0 / std::sqrt(s);
    }
  }

  PeriodicGrid torus_;
  AtlasConfig cfg_;
  PeriodicGrid chart_grid_;
  int per_axis_ = 1;
  int reach_ = 0;
  std::vector<double> bump1d_;
  std::vector<double> inv_norm1d_;
};

/// Chart-local fields keyed by chart number; absent keys are zero.
struct ChartSequence {
  PeriodicGrid chart_grid;
  std::map<std::size_t, SampledField> entries;
};

/// (Qu)_kappa = psi(. ) u(kappa + .), stored on the chart grid.
inline ChartSequence q_restrict(const SampledField& u, const TorusAtlas& atlas) {
  require_same_grid(u.grid, atlas.torus(), "q_restrict");
  ChartSequence out{atlas.chart_grid(), {}};
  for (std::size_t c = 0; c < atlas.chart_count(); ++c) {
    SampledField e(atlas.chart_grid());
    bool any = false;
    atlas.for_chart(c, [&](std::size_t tor, std::size_t loc, double w) {
      e.values[loc] = w * u.values[tor];
      any = any || u.values[tor] != cplx{0.0, 0.0};
    });
    if (any) out.entries.emplace(c, std::move(e));
  }
  return out;
}

/// PF = sum_kappa psi(. - kappa) F_kappa(. - kappa).
inline SampledField p_assemble(const ChartSequence& F, const TorusAtlas& atlas) {
  if (!F.chart_grid.same_as(atlas.chart_grid())) throw GridMismatch("p_assemble: chart grid does not match the atlas");
  SampledField u(atlas.torus());
  for (const auto& [c, e] : F.entries) {
    if (c >= atlas.chart_count()) throw GridMismatch("p_assemble: chart index outside the atlas");
    atlas.for_chart(c, [&](std::size_t tor, std::size_t loc, double w) { u.values[tor] += w * e.values[loc]; });
  }
  return u;
}

/// (sum_kappa hfio_norm((Qu)_kappa, s, p)^p)^{1/p}.
inline double hfio_norm_torus(const SampledField& u, double s, double p, const TorusAtlas& atlas,
                              const WavePacketFrame& frame, const DirectionSet& dirs) {
  require_exponent(p);
  const ChartSequence Q = q_restrict(u, atlas);
  double acc = 0.0;
  for (const auto& [c, e] : Q.entries) acc += std::pow(hfio_norm(e, s, p, frame, dirs), p);
  return std::pow(acc, 1.0 / p);
}

// Half-density pullback -----------------------------------------------------------

struct Diffeomorphism {
  std::function<Vec(const Vec&)> map;
  std::function<double(const Vec&)> jacobian_det;
};

inline Diffeomorphism affine_map(const Vec& center, const std::array<Vec, 3>& A, int dim, const Vec& shift = {0, 0, 0}) {
  Diffeomorphism d;
  d.map = [=](const Vec& x) {
    Vec y = center + shift;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) y[a] += A[a][b] * (x[b] - center[b]);
    return y;
  };
  Mat m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m(a, b) = A[a][b];
  const double det = m.determinant();
  d.jacobian_det = [det](const Vec&) { return det; };
  return d;
}

/// |det d chi(x)|^gamma f(chi(x)) by spectral interpolation of f. Targets must
/// stay inside the fundamental cell [0, L)^n (no periodic wrap).
inline SampledField half_density_pullback(const SampledField& f, const Diffeomorphism& chi, double gamma) {
  const PeriodicGrid& g = f.grid;
  const Spectrum s = forward(f);
  SampledField out(g);
  const double L = g.period();
  std::vector<std::size_t> support;
  double cmax = 0.0;
  for (const auto& c : s.coeffs) cmax = std::max(cmax, std::abs(c));
  for (std::size_t i = 0; i < s.coeffs.size(); ++i)
    if (std::abs(s.coeffs[i]) > 1e-15 * cmax) support.push_back(i);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.position(i);
    const Vec y = chi.map(x);
    for (int a = 0; a < g.dim(); ++a)
      if (y[a] < -1e-12 * L || y[a] > L * (1.0 + 1e-12))
        throw ResolutionError("half_density_pullback: target point leaves the interpolation cell");
    cplx acc{0.0, 0.0};
    for (auto j : support) acc += s.coeffs[j] * std::polar(1.0, dot(g.frequency(j), y));
    out.values[i] = std::pow(std::abs(chi.jacobian_det(x)), gamma) * acc;
  }
  return out;
}

// Cubic wave equation ------------------------------------------------------------

struct NlwConfig {
  double t0 = 0.5;
  int time_nodes = 17;
  int sign = -1;            // -1 defocusing (u_tt - Lap u + |u|^2 u = 0), +1 focusing
  int power = 3;            // 3 cubic, 5 quintic
  int max_iterations = 10;
  double tolerance = 1e-12; // stop once the update is below tolerance * ||u||_S
  bool zero_nonlinearity = false;
};

struct NlwReport {
  TimeSamples times;
  std::vector<SampledField> solution;     // u at each time node
  std::vector<double> update_norms;       // ||u_{j+1} - u_j||_S
  std::vector<double> contraction_factors;
  double residual = 0.0;                  // ||u - L - N(u)||_S
  double relative_residual = 0.0;
  double s_norm = 0.0;                    // ||u||_S
  double strichartz_norm = 0.0;           // L^4_t L^6_x part
  double energy_norm = 0.0;               // sup_t W^{1/2,2} part
  std::vector<double> energy;
  double energy_drift = 0.0;              // max |E(t) - E(0)| / E(0)
  double continuity_gap = 0.0;            // max adjacent-node W^{1/2,2} difference
  int iterations = 0;
  bool diverged = false;
  bool converged = false;
};

inline void to_json(nlohmann::json& j, const NlwReport& r) {
  j = nlohmann::json{{"contraction_factors", r.contraction_factors},
                     {"update_norms", r.update_norms},
                     {"residual", r.residual},
                     {"relative_residual", r.relative_residual},
                     {"s_norm", r.s_norm},
                     {"strichartz_norm", r.strichartz_norm},
                     {"energy_norm", r.energy_norm},
                     {"energy_series", r.energy},
                     {"energy_drift", r.energy_drift},
                     {"continuity_gap", r.continuity_gap},
                     {"iterations", r.iterations},
                     {"diverged", r.diverged},
                     {"converged", r.converged}};
}

namespace detail {

using SpectralPath = std::vector<std::vector<cplx>>;  // coefficients per time node

inline double sobolev_l2_from_coeffs(const PeriodicGrid& g, const std::vector<cplx>& c, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += std::norm(c[i]) * std::pow(bracket(norm(g.frequency(i))), 2.0 * s);
  return std::sqrt(acc * g.volume());
}

struct SNorm {
  double strichartz = 0.0;
  double energy = 0.0;
  double total() const { return strichartz + energy; }
};

/// L^4_t L^6_x (trapezoid in t) plus sup_t ||.||_{W^{1/2,2}}.
inline SNorm s_norm(const PeriodicGrid& g, const TimeSamples& ts, const SpectralPath& path) {
  SNorm out;
  double acc = 0.0;
  std::vector<cplx> buf;
  for (std::size_t i = 0; i < path.size(); ++i) {
    buf = path[i];
    synthesize_inplace(g, buf);
    const double l6 = std::pow(lp_norm_pow(buf, 6.0, g.cell_volume()), 1.0 / 6.0);
    acc += ts.w[i] * std::pow(l6, 4.0);
    out.energy = std::max(out.energy, sobolev_l2_from_coeffs(g, path[i], 0.5));
  }
  out.strichartz = std::pow(acc, 0.25);
  return out;
}

inline SpectralPath difference(const SpectralPath& a, const SpectralPath& b) {
  SpectralPath d = a;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j) d[i][j] -= b[i][j];
  return d;
}

/// Coefficients of |u|^{power-1} u at each node.
inline SpectralPath nonlinearity(const PeriodicGrid& g, const SpectralPath& u, int power) {
  SpectralPath out(u.size());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::vector<cplx> buf = u[i];
    synthesize_inplace(g, buf);
    for (auto& v : buf) v *= std::pow(std::abs(v), power - 1);
    detail::fft_inplace(g, buf, FFTW_FORWARD);
    for (auto& v : buf) v *= scale;
    out[i] = std::move(buf);
  }
  return out;
}

/// sign * int_0^{t_i} sin((t_i - s)|D|)/|D| F(s) ds by the trapezoid rule on the nodes.
inline SpectralPath duhamel(const PeriodicGrid& g, const TimeSamples& ts, const SpectralPath& F, int sign, bool derivative) {
  SpectralPath out(ts.t.size(), std::vector<cplx>(g.size(), cplx{0.0, 0.0}));
  std::vector<double> r(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) r[j] = norm(g.frequency(j));
  for (std::size_t i = 1; i < ts.t.size(); ++i) {
    const std::vector<double> w = trapezoid_weights(std::vector<double>(ts.t.begin(), ts.t.begin() + i + 1));
    for (std::size_t l = 0; l <= i; ++l) {
      const double tau = ts.t[i] - ts.t[l];
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double k = derivative ? std::cos(tau * r[j]) : sin_over(tau, r[j]);
        out[i][j] += static_cast<double>(sign) * w[l] * k * F[l][j];
      }
    }
  }
  return out;
}

}  // namespace detail

/// Picard iteration u_{j+1} = L(f1, f2) + N(u_j) on [0, t0].
inline NlwReport nlw_picard(const SampledField& f1, const SampledField& f2, const NlwConfig& cfg) {
  require_same_grid(f1.grid, f2.grid, "nlw_picard");
  const PeriodicGrid& g = f1.grid;
  require(g.dim() == 2, "nlw_picard: the solver runs on two-dimensional tori");
  require(cfg.t0 > 0.0 && cfg.t0 <= 1.0, "nlw_picard: t0 must lie in (0, 1]");
  require(cfg.time_nodes >= 17, "nlw_picard: need at least 17 time nodes");
  require(cfg.sign == 1 || cfg.sign == -1, "nlw_picard: sign must be +1 or -1");
  require(cfg.power == 3 || cfg.power == 5, "nlw_picard: power must be 3 or 5");
  NlwReport rep;
  rep.times = TimeSamples::uniform(0.0, cfg.t0, cfg.time_nodes);
  const auto& ts = rep.times;

  const Spectrum a = forward(f1), b = forward(f2);
  detail::SpectralPath lin(ts.t.size()), lin_dt(ts.t.size());
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    lin[i].resize(g.size());
    lin_dt[i].resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double r = norm(g.frequency(j)), t = ts.t[i];
      lin[i][j] = std::cos(t * r) * a.coeffs[j] + sin_over(t, r) * b.coeffs[j];
      lin_dt[i][j] = -r * std::sin(t * r) * a.coeffs[j] + std::cos(t * r) * b.coeffs[j];
    }
  }
  auto step = [&](const detail::SpectralPath& u) {
    if (cfg.zero_nonlinearity) return lin;
    auto F = detail::nonlinearity(g, u, cfg.power);
    auto N = detail::duhamel(g, ts, F, cfg.sign, false);
    for (std::size_t i = 0; i < N.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) N[i][j] += lin[i][j];
    return N;
  };

  detail::SpectralPath u = lin;
  int above = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    detail::SpectralPath next = step(u);
    const double upd = detail::s_norm(g, ts, detail::difference(next, u)).total();
    const double size = detail::s_norm(g, ts, next).total();
    rep.update_norms.push_back(upd);
    if (rep.update_norms.size() >= 2) {
      const double prev = rep.update_norms[rep.update_norms.size() - 2];
      const double factor = prev > 0.0 ? upd / prev : 0.0;
      rep.contraction_factors.push_back(factor);
      above = factor > 1.0 ? above + 1 : 0;
      if (above >= 3) rep.diverged = true;
    }
    u = std::move(next);
    rep.iterations = it + 1;
    if (rep.diverged) break;
    if (upd <= cfg.tolerance * std::max(size, 1e-300)) {
      rep.converged = true;
      break;
    }
  }

  const auto S = detail::s_norm(g, ts, u);
  rep.s_norm = S.total();
  rep.strichartz_norm = S.strichartz;
  rep.energy_norm = S.energy;
  rep.residual = detail::s_norm(g, ts, detail::difference(u, step(u))).total();
  rep.relative_residual = rep.s_norm > 0.0 ? rep.residual / rep.s_norm : 0.0;
  if (!rep.converged && rep.relative_residual <= 1e-6) rep.converged = !rep.diverged;

  // Energy 1/2|u_t|^2 + 1/2|grad u|^2 + (1/(power+1))|u|^{power+1} (defocusing sign).
  detail::SpectralPath ut = lin_dt;
  if (!cfg.zero_nonlinearity) {
    const auto F = detail::nonlinearity(g, u, cfg.power);
    const auto D = detail::duhamel(g, ts, F, cfg.sign, true);
    for (std::size_t i = 0; i < ut.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) ut[i][j] += D[i][j];
  }
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    double quad = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double r = norm(g.frequency(j));
      quad += std::norm(ut[i][j]) + r * r * std::norm(u[i][j]);
    }
    quad *= 0.5 * g.volume();
    std::vector<cplx> buf = u[i];
    synthesize_inplace(g, buf);
    const double pot = cfg.zero_nonlinearity ? 0.0
                                             : -cfg.sign * lp_norm_pow(buf, cfg.power + 1.0, g.cell_volume()) / (cfg.power + 1.0);
    rep.energy.push_back(quad + pot);
    rep.solution.emplace_back(g, std::move(buf));
  }
  for (double e : rep.energy)
    rep.energy_drift = std::max(rep.energy_drift, rep.energy[0] != 0.0 ? std::abs(e - rep.energy[0]) / std::abs(rep.energy[0]) : 0.0);
  for (std::size_t i = 1; i < u.size(); ++i) {
    std::vector<cplx> d = u[i];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= u[i - 1][j];
    rep.continuity_gap = std::max(rep.continuity_gap, detail::sobolev_l2_from_coeffs(g, d, 0.5));
  }
  return rep;
}

/// ||f1||_{W^{1/2,2}} + ||f2||_{W^{-1/2,2}}.
inline double nlw_data_norm(const SampledField& f1, const SampledField& f2) {
  return detail::sobolev_l2_from_coeffs(f1.grid, forward(f1).coeffs, 0.5) +
         detail::sobolev_l2_from_coeffs(f2.grid, forward(f2).coeffs, -0.5);
}

// Local smoothing probe ------------------------------------------------------------

struct LocalSmoothingReport {
  double spacetime_norm = 0.0;  // (int_{-t0}^{t0} ||u(t)||_p^p dt)^{1/p}
  double fio_data = 0.0;        // ||u0||_{H^{sigma,p}_FIO} + ||u1||_{H^{sigma-1,p}_FIO}, sigma = d - s + eps
  double sobolev_data = 0.0;    // same with W^{d + eps, p}
  double fio_ratio = 0.0;
  double sobolev_ratio = 0.0;
};

inline LocalSmoothingReport local_smoothing_probe(const SampledField& u0, const SampledField& u1, Rational p, double eps,
                                                  double t0, int time_nodes, const TorusAtlas& atlas,
                                                  const WavePacketFrame& frame, const DirectionSet& dirs) {
  require(p > Rational(2), "local_smoothing_probe: p must exceed 2");
  require_same_grid(u0.grid, u1.grid, "local_smoothing_probe");
  const ExponentTable ex = exponents(u0.grid.dim(), p);
  const double pv = p.value();
  LocalSmoothingReport rep;
  const TimeSamples ts = TimeSamples::uniform(-t0, t0, time_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < ts.t.size(); ++i) acc += ts.w[i] * lp_norm_pow(wave_solution(u0, u1, ts.t[i]).values, pv, u0.grid.cell_volume());
  rep.spacetime_norm = std::pow(acc, 1.0 / pv);
  const double sig = ex.d_minus_s.value() + eps;
  rep.fio_data = hfio_norm_torus(u0, sig, pv, atlas, frame, dirs) + hfio_norm_torus(u1, sig - 1.0, pv, atlas, frame, dirs);
  const double sob = ex.d.value() + eps;
  rep.sobolev_data = sobolev_norm(u0, sob, pv) + sobolev_norm(u1, sob - 1.0, pv);
  rep.fio_ratio = rep.fio_data > 0.0 ? rep.spacetime_norm / rep.fio_data : 0.0;
  rep.sobolev_ratio = rep.sobolev_data > 0.0 ? rep.spacetime_norm / rep.sobolev_data : 0.0;
  return rep;
}

}  // namespace hfio
