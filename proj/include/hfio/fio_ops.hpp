#pragma once

// Standard-form Fourier integral operators
//   Tf(x, t) = int e^{i Phi(x, t, eta)} a(x, t, eta) f^(eta) d eta
// on the periodic emulation, wave propagators, the cinematic-curvature rank
// check and the flow-approximation diagnostic.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hfio/errors.hpp"
#include "hfio/quadrature.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

/// Phi(z, eta) with z = (x, t). Phases of the form x.eta + t h(eta) register h,
/// which enables the multiplier path of apply_fio and analytic curvature data.
class PhaseFunction {
public:
  using Eval = std::function<double(const Vec& x, double t, const Vec& eta)>;
  using TimeSymbol = std::function<double(const Vec& eta)>;
  using TimeHessian = std::function<Mat(const Vec& eta)>;

  PhaseFunction() = default;
  PhaseFunction(std::string name, int dim, Eval eval) : name_(std::move(name)), dim_(dim), eval_(std::move(eval)) {}

  /// x.eta + t h(eta), h homogeneous of degree 1.
  static PhaseFunction translation_plus(std::string name, int dim, TimeSymbol h,
                                        std::optional<TimeHessian> hess = std::nullopt) {
    PhaseFunction p(std::move(name), dim, [h](const Vec& x, double t, const Vec& eta) { return dot(x, eta) + t * h(eta); });
    p.h_ = std::move(h);
    p.hess_ = std::move(hess);
    return p;
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double operator()(const Vec& x, double t, const Vec& eta) const { return eval_(x, t, eta); }
  bool has_time_symbol() const { return static_cast<bool>(h_); }
  double time_symbol(const Vec& eta) const { return h_(eta); }
  bool has_analytic_hessian() const { return hess_.has_value(); }
  Mat time_hessian(const Vec& eta) const { return (*hess_)(eta); }

  /// grad_z Phi in R^{n+1} (x components first, t last).
  Eigen::VectorXd z_gradient(const Vec& x, double t, const Vec& eta) const {
    Eigen::VectorXd g(dim_ + 1);
    if (h_) {
      for (int a = 0; a < dim_; ++a) g[a] = eta[a];
      g[dim_] = h_(eta);
      return g;
    }
    const double step = 1e-5 * std::max(1.0, norm(x) + std::abs(t));
    for (int a = 0; a <= dim_; ++a) {
      Vec xp = x, xm = x;
      double tp = t, tm = t;
      if (a < dim_) {
        xp[a] += step;
        xm[a] -= step;
      } else {
        tp += step;
        tm -= step;
      }
      g[a] = (eval_(xp, tp, eta) - eval_(xm, tm, eta)) / (2.0 * step);
    }
    return g;
  }

  /// grad_eta Phi at (x, t), fourth-order central differences.
  Vec eta_gradient(const Vec& x, double t, const Vec& eta) const {
    Vec g{0.0, 0.0, 0.0};
    const double step = 1e-3 * std::max(1e-3, norm(eta));
    for (int a = 0; a < dim_; ++a) {
      auto at = [&](double d) {
        Vec e = eta;
        e[a] += d;
        return eval_(x, t, e);
      };
      g[a] = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
    }
    return g;
  }

private:
  std::string name_;
  int dim_ = 2;
  Eval eval_;
  TimeSymbol h_;
  std::optional<TimeHessian> hess_;
};

// Phase library ---------------------------------------------------------------

inline PhaseFunction flat_phase(int dim) {
  return PhaseFunction::translation_plus("flat", dim, [](const Vec&) { return 0.0; },
                                         [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); });
}

inline Mat cone_hessian(const Vec& eta, int dim) {
  const double r = norm(eta);
  Mat h(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) h(a, b) = ((a == b ? 1.0 : 0.0) - eta[a] * eta[b] / (r * r)) / r;
  return h;
}

/// x.eta + t |eta|.
inline PhaseFunction half_wave_phase(int dim) {
  return PhaseFunction::translation_plus("half_wave", dim, [](const Vec& eta) { return norm(eta); },
                                         [dim](const Vec& eta) { return cone_hessian(eta, dim); });
}

/// x.eta + t (eta . A eta)^{1/2} with A symmetric positive definite (diagonal here).
inline PhaseFunction anisotropic_phase(int dim, const Vec& diag) {
  for (int a = 0; a < dim; ++a) require(diag[a] > 0.0, "anisotropic_phase: diagonal entries must be positive");
  auto h = [diag, dim](const Vec& eta) {
    double q = 0.0;
    for (int a = 0; a < dim; ++a) q += diag[a] * eta[a] * eta[a];
    return std::sqrt(q);
  };
  auto hess = [diag, dim, h](const Vec& eta) {
    const double q = h(eta);
    Mat m(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        m(a, b) = ((a == b ? diag[a] : 0.0) - diag[a] * eta[a] * diag[b] * eta[b] / (q * q)) / q;
    return m;
  };
  return PhaseFunction::translation_plus("anisotropic", dim, h, hess);
}

/// x.eta + t (|eta| + eps eta_1^3 / |eta|^2); curvature data by finite differences.
inline PhaseFunction cubic_perturbed_phase(int dim, double eps) {
  return PhaseFunction::translation_plus("cubic_perturbed", dim, [eps](const Vec& eta) {
    const double r = norm(eta);
    return r + eps * eta[0] * eta[0] * eta[0] / (r * r);
  });
}

/// Phase by registry name; `params` may carry "eps" and "diag".
inline PhaseFunction make_phase(const std::string& name, int dim, const nlohmann::json& given = nlohmann::json::object()) {
  const nlohmann::json params = given.is_null() ? nlohmann::json::object() : given;
  if (name == "flat") return flat_phase(dim);
  if (name == "half_wave") return half_wave_phase(dim);
  if (name == "anisotropic") {
    Vec d{1.0, 1.0, 1.0};
    if (params.contains("diag"))
      for (std::size_t a = 0; a < params["diag"].size() && a < 3; ++a) d[a] = params["diag"][a].get<double>();
    return anisotropic_phase(dim, d);
  }
  if (name == "cubic_perturbed") return cubic_perturbed_phase(dim, params.value("eps", 0.1));
  throw DomainError("make_phase: unknown phase '" + name + "'");
}

/// Worst relative violation of Phi(z, lambda eta) = lambda Phi(z, eta), lambda in {2, 1/2}.
inline double homogeneity_defect(const PhaseFunction& phi, const std::vector<std::pair<Vec, double>>& zs,
                                 const std::vector<Vec>& etas) {
  double worst = 0.0;
  for (const auto& [x, t] : zs)
    for (const auto& eta : etas)
      for (double lam : {2.0, 0.5}) {
        const double a = phi(x, t, lam * eta), b = lam * phi(x, t, eta);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
      }
  return worst;
}

// Symbols ---------------------------------------------------------------------

/// a(z, eta) = a1(x, t) a2(eta): a smooth compact spatial cutoff around
/// `center` (radius = support) times a frequency factor of order m.
struct SymbolFunction {
  double order = 0.0;
  std::optional<double> support_radius;  // nullopt: a1 = 1 everywhere
  double plateau_radius = 0.0;
  Vec center{0.0, 0.0, 0.0};
  std::function<double(const Vec& eta)> frequency = [](const Vec&) { return 1.0; };

  static SymbolFunction unit() { return {}; }
  static SymbolFunction cutoff(const Vec& center, double plateau, double support) {
    require(support > plateau && plateau >= 0.0, "SymbolFunction::cutoff: need 0 <= plateau < support");
    SymbolFunction s;
    s.center = center;
    s.plateau_radius = plateau;
    s.support_radius = support;
    return s;
  }

  double spatial(const PeriodicGrid& g, const Vec& x) const {
    if (!support_radius) return 1.0;
    Vec d = x - center;
    for (int a = 0; a < g.dim(); ++a) d[a] -= g.period() * std::round(d[a] / g.period());
    return plateau_cutoff(norm(d), plateau_radius, *support_radius);
  }
  double operator()(const PeriodicGrid& g, const Vec& x, const Vec& eta) const { return spatial(g, x) * frequency(eta); }
};

// Space-time fields -----------------------------------------------------------

/// Time samples with quadrature weights.
struct TimeSamples {
  std::vector<double> t;
  std::vector<double> w;

  static TimeSamples uniform(double t0, double t1, int count) {
    require(count >= 2 && t1 > t0, "TimeSamples::uniform: need >= 2 nodes on a nonempty interval");
    TimeSamples s;
    for (int i = 0; i < count; ++i) s.t.push_back(t0 + (t1 - t0) * i / (count - 1));
    s.w = trapezoid_weights(s.t);
    return s;
  }
  /// Nodes t = c + h sinh(alpha u) / sinh(alpha) (clustered at c), u the
  /// Gauss-Legendre nodes on [-1, 1].
  static TimeSamples clustered(double center, double half_width, int count, double alpha) {
    require(count >= 3 && half_width > 0.0 && alpha > 0.0, "TimeSamples::clustered: invalid parameters");
    TimeSamples s;
    const GaussLegendre rule(count);
    for (int i = 0; i < count; ++i) {
      const double u = rule.nodes[i];
      s.t.push_back(center + half_width * std::sinh(alpha * u) / std::sinh(alpha));
      s.w.push_back(rule.weights[i] * half_width * alpha * std::cosh(alpha * u) / std::sinh(alpha));
    }
    return s;
  }
  double length() const { return t.empty() ? 0.0 : t.back() - t.front(); }
};

struct SpaceTimeField {
  PeriodicGrid grid;
  TimeSamples times;
  std::vector<std::vector<cplx>> slices;  // one per time node

  SampledField at(std::size_t i) const { return SampledField(grid, slices[i]); }
};

/// (sum_t w_t ||u(t)||_p^p)^{1/p}.
inline double spacetime_lp_pow(const SpaceTimeField& u, double p) {
  require_exponent(p);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.slices.size(); ++i) acc += u.times.w[i] * lp_norm_pow(u.slices[i], p, u.grid.cell_volume());
  return acc;
}
inline double spacetime_lp_norm(const SpaceTimeField& u, double p) { return std::pow(spacetime_lp_pow(u, p), 1.0 / p); }

// Operators -------------------------------------------------------------------

struct StandardFormFIO {
  PhaseFunction phase;
  SymbolFunction symbol;
  PeriodicGrid grid;
  TimeSamples times;
};

enum class FioPath { automatic, multiplier, direct };

namespace detail {

inline void check_fio_input(const StandardFormFIO& T, const SampledField& f, const Spectrum& spec) {
  require_same_grid(T.grid, f.grid, "apply_fio");
  if (T.phase.dim() != f.grid.dim()) throw GridMismatch("apply_fio: phase and grid dimensions differ");
  if (f.band_limit && *f.band_limit > f.grid.nyquist())
    throw ResolutionError("apply_fio: declared band limit exceeds the grid Nyquist frequency");
  const std::size_t zero = 0;  // flat index of xi = 0
  double cmax = 0.0;
  for (const auto& c : spec.coeffs) cmax = std::max(cmax, std::abs(c));
  if (cmax > 0.0 && std::abs(spec.coeffs[zero]) > 1e-12 * cmax)
    throw SupportError("apply_fio: the eta = 0 coefficient must vanish (phase is singular at the origin)");
}

}  // namespace detail

/// Tf on the operator's space-time grid. The discrete quadrature is
/// Tf(z) = sum_eta e^{i Phi(z, eta)} a(z, eta) f^(eta) (2 pi / L)^n.
inline SpaceTimeField apply_fio(const StandardFormFIO& T, const SampledField& f, FioPath path = FioPath::automatic) {
  const Spectrum spec = forward(f);
  detail::check_fio_input(T, f, spec);
  const PeriodicGrid& g = T.grid;
  const double scale = std::pow(kTwoPi, g.dim());  // f^ (2 pi / L)^n = (2 pi)^n c
  SpaceTimeField out{g, T.times, {}};
  const bool fast = T.phase.has_time_symbol() && path != FioPath::direct;
  if (path == FioPath::multiplier && !T.phase.has_time_symbol())
    throw DomainError("apply_fio: multiplier path requires a phase of the form x.eta + t h(eta)");

  std::vector<double> spatial(g.size(), 1.0);
  if (T.symbol.support_radius)
    for (std::size_t i = 0; i < g.size(); ++i) spatial[i] = T.symbol.spatial(g, g.position(i));

  if (fast) {
    std::vector<double> hv(g.size()), a2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec eta = g.frequency(i);
      hv[i] = i == 0 ? 0.0 : T.phase.time_symbol(eta);
      a2[i] = T.symbol.frequency(eta);
    }
    for (double t : T.times.t) {
      std::vector<cplx> buf(g.size());
      for (std::size_t i = 0; i < g.size(); ++i)
        buf[i] = spec.coeffs[i] == cplx{0.0, 0.0} ? cplx{0.0, 0.0}
                                                   : scale * a2[i] * spec.coeffs[i] * std::polar(1.0, t * hv[i]);
      synthesize_inplace(g, buf);
      for (std::size_t i = 0; i < g.size(); ++i) buf[i] *= spatial[i];
      out.slices.push_back(std::move(buf));
    }
    return out;
  }

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i)
    if (spec.coeffs[i] != cplx{0.0, 0.0}) support.push_back(i);
  for (double t : T.times.t) {
    std::vector<cplx> slice(g.size());
    for (std::size_t z = 0; z < g.size(); ++z) {
      const Vec x = g.position(z);
      cplx acc{0.0, 0.0};
      for (auto i : support) {
        const Vec eta = g.frequency(i);
        acc += spec.coeffs[i] * T.symbol.frequency(eta) * std::polar(1.0, T.phase(x, t, eta));
      }
      slice[z] = scale * spatial[z] * acc;
    }
    out.slices.push_back(std::move(slice));
  }
  return out;
}

/// Tf at a single off-grid point by the direct quadrature.
inline cplx apply_fio_at(const StandardFormFIO& T, const Spectrum& spec, const Vec& x, double t) {
  const PeriodicGrid& g = T.grid;
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    if (spec.coeffs[i] == cplx{0.0, 0.0}) continue;
    const Vec eta = g.frequency(i);
    acc += spec.coeffs[i] * T.symbol.frequency(eta) * std::polar(1.0, T.phase(x, t, eta));
  }
  return std::pow(kTwoPi, g.dim()) * T.symbol.spatial(g, x) * acc;
}

/// e^{it|D|} f; the factor at xi = 0 is 1.
inline SampledField half_wave_propagator(const SampledField& f, double t) {
  Spectrum s = forward(f);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= std::polar(1.0, t * norm(s.grid.frequency(i)));
  return inverse(std::move(s), f.band_limit);
}

inline double sin_over(double t, double r) { return r == 0.0 ? t : std::sin(t * r) / r; }

/// cos(t|D|) u0 + sin(t|D|)/|D| u1, with the xi = 0 value u0^(0) + t u1^(0).
inline SampledField wave_solution(const SampledField& u0, const SampledField& u1, double t) {
  require_same_grid(u0.grid, u1.grid, "wave_solution");
  Spectrum a = forward(u0);
  const Spectrum b = forward(u1);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const double r = norm(a.grid.frequency(i));
    a.coeffs[i] = std::cos(t * r) * a.coeffs[i] + sin_over(t, r) * b.coeffs[i];
  }
  return inverse(std::move(a));
}

/// d/dt of wave_solution.
inline SampledField wave_velocity(const SampledField& u0, const SampledField& u1, double t) {
  require_same_grid(u0.grid, u1.grid, "wave_velocity");
  Spectrum a = forward(u0);
  const Spectrum b = forward(u1);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const double r = norm(a.grid.frequency(i));
    a.coeffs[i] = -r * std::sin(t * r) * a.coeffs[i] + std::cos(t * r) * b.coeffs[i];
  }
  return inverse(std::move(a));
}

/// ||d_t u||_2^2 + ||grad u||_2^2 via Parseval.
inline double wave_energy(const SampledField& u, const SampledField& ut) {
  const Spectrum a = forward(u), b = forward(ut);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const double r = norm(a.grid.frequency(i));
    acc += r * r * std::norm(a.coeffs[i]) + std::norm(b.coeffs[i]);
  }
  return acc * u.grid.volume();
}

// Curvature -------------------------------------------------------------------

struct CurvatureSample {
  Vec x{0.0, 0.0, 0.0};
  double t = 0.0;
  Vec eta{1.0, 0.0, 0.0};
  int rank_mixed = 0;                // rank of d^2_{x eta} Phi
  int rank_gauss = 0;                // rank of d^2_{eta eta}(d_z Phi . G)
  std::vector<double> sv_mixed;
  std::vector<double> sv_gauss;
  double gauss_norm = 0.0;
  bool degenerate_gauss = false;
  double min_retained_gauss = 0.0;   // smallest singular value counted in rank_gauss
};

struct CurvatureReport {
  std::string phase;
  double threshold = 1e-8;
  std::vector<CurvatureSample> samples;
  bool cinematic = false;
  int degenerate_count = 0;
  double min_retained_gauss = 0.0;
};

namespace detail {

inline std::vector<double> singular_values(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

inline int rank_of(const std::vector<double>& sv, double rel, double* min_retained) {
  if (sv.empty() || sv[0] == 0.0) {
    if (min_retained) *min_retained = 0.0;
    return 0;
  }
  int r = 0;
  double last = 0.0;
  for (double v : sv)
    if (v > rel * sv[0]) {
      ++r;
      last = v;
    }
  if (min_retained) *min_retained = last;
  return r;
}

/// Generalized cross product of the n columns of an (n+1) x n matrix.
inline Eigen::VectorXd wedge(const Mat& cols) {
  const int m = static_cast<int>(cols.rows());
  Eigen::VectorXd g(m);
  for (int j = 0; j < m; ++j) {
    Mat minor(m - 1, m - 1);
    for (int r = 0, rr = 0; r < m; ++r) {
      if (r == j) continue;
      for (int c = 0; c < m - 1; ++c) minor(rr, c) = cols(r, c);
      ++rr;
    }
    g[j] = ((j + m - 1) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
  }
  return g;
}

/// Richardson-extrapolated central second differences of F at eta.
template <class F>
Mat fd_hessian(F&& fn, const Vec& eta, int dim, double step) {
  auto second = [&](int a, int b, double h) {
    auto at = [&](double sa, double sb) {
      Vec e = eta;
      e[a] += sa;
      e[b] += sb;
      return fn(e);
    };
    if (a == b) return (at(h, 0) - 2.0 * fn(eta) + at(-h, 0)) / (h * h);
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
  };
  Mat m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      const double coarse = second(a, b, step), fine = second(a, b, 0.5 * step);
      m(a, b) = m(b, a) = (4.0 * fine - coarse) / 3.0;
    }
  return m;
}

}  // namespace detail

/// Rank test of d^2_{x eta} Phi and d^2_{eta eta}(d_z Phi(z0, eta) . G(z0, eta0)),
/// G the wedge of d_{eta_i} d_z Phi. Singular values below threshold * largest
/// are discarded.
inline CurvatureReport curvature_check(const PhaseFunction& phi, const std::vector<CurvatureSample>& points,
                                       double threshold = 1e-8) {
  const int n = phi.dim();
  CurvatureReport rep;
  rep.phase = phi.name();
  rep.threshold = threshold;
  rep.cinematic = !points.empty();
  rep.min_retained_gauss = std::numeric_limits<double>::infinity();
  for (auto s : points) {
    require(norm(s.eta) > 0.0, "curvature_check: eta0 must be nonzero");
    const double h = 1e-4 * norm(s.eta);
    const double hess_step = 1e-3 * norm(s.eta);
    // d_{eta_i} d_z Phi as columns of an (n+1) x n matrix.
    Mat dz_deta(n + 1, n);
    for (int i = 0; i < n; ++i) {
      Vec ep = s.eta, em = s.eta;
      ep[i] += h;
      em[i] -= h;
      dz_deta.col(i) = (phi.z_gradient(s.x, s.t, ep) - phi.z_gradient(s.x, s.t, em)) / (2.0 * h);
    }
    const Mat mixed = dz_deta.topRows(n);
    s.sv_mixed = detail::singular_values(mixed);
    s.rank_mixed = detail::rank_of(s.sv_mixed, threshold, nullptr);

    const Eigen::VectorXd G = detail::wedge(dz_deta);
    s.gauss_norm = G.norm();
    Mat hess(n, n);
    if (s.gauss_norm < 1e-12) {
      s.degenerate_gauss = true;
      ++rep.degenerate_count;
      hess.setZero();
    } else if (phi.has_time_symbol()) {
      // d_z Phi . G = eta . G_x + h(eta) G_t; only the h term is curved.
      const Mat ht = phi.has_analytic_hessian()
                         ? phi.time_hessian(s.eta)
                         : detail::fd_hessian([&](const Vec& e) { return phi.time_symbol(e); }, s.eta, n, hess_step);
      hess = G[n] * ht;
    } else {
      // d_z Phi . G as a derivative along G of the eta-Hessian of Phi; the
      // outer step is large since Phi is smooth in z.
      const Eigen::VectorXd u = G / s.gauss_norm;
      const double eps = 0.05 * (1.0 + norm(s.x) + std::abs(s.t));
      auto shifted = [&](double e) {
        Vec x = s.x;
        for (int a = 0; a < n; ++a) x[a] += e * u[a];
        const double t = s.t + e * u[n];
        return detail::fd_hessian([&](const Vec& v) { return phi(x, t, v); }, s.eta, n, hess_step);
      };
      hess = s.gauss_norm * (8.0 * (shifted(eps) - shifted(-eps)) - (shifted(2.0 * eps) - shifted(-2.0 * eps))) / (12.0 * eps);
    }
    s.sv_gauss = detail::singular_values(hess);
    s.rank_gauss = detail::rank_of(s.sv_gauss, threshold, &s.min_retained_gauss);
    if (s.rank_gauss > 0) rep.min_retained_gauss = std::min(rep.min_retained_gauss, s.min_retained_gauss);
    rep.cinematic = rep.cinematic && !s.degenerate_gauss && s.rank_mixed == n && s.rank_gauss == n - 1;
    rep.samples.push_back(std::move(s));
  }
  if (!std::isfinite(rep.min_retained_gauss)) rep.min_retained_gauss = 0.0;
  return rep;
}

/// Sample points on the cone: eta0 = r omega with omega at `count` equispaced
/// angles (n = 2) or Fibonacci points (n = 3), z0 cycling through small offsets.
inline std::vector<CurvatureSample> cone_samples(int dim, int count, double radius = 1.0) {
  std::vector<CurvatureSample> out;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    CurvatureSample s;
    if (dim == 2) {
      const double a = kTwoPi * (i + 0.5) / count;
      s.eta = {radius * std::cos(a), radius * std::sin(a), 0.0};
    } else {
      const double z = 1.0 - (2.0 * i + 1.0) / count, rho = std::sqrt(1.0 - z * z);
      s.eta = {radius * rho * std::cos(golden * i), radius * rho * std::sin(golden * i), radius * z};
    }
    s.x = {0.1 * std::cos(0.7 * i), 0.1 * std::sin(1.3 * i), 0.0};
    s.t = 0.05 * (i % 7);
    out.push_back(s);
  }
  return out;
}

inline void to_json(nlohmann::json& j, const CurvatureReport& r) {
  j = nlohmann::json{{"phase", r.phase},
                     {"threshold", r.threshold},
                     {"cinematic", r.cinematic},
                     {"samples", r.samples.size()},
                     {"degenerate_gauss", r.degenerate_count},
                     {"min_retained_singular_value", r.min_retained_gauss}};
  nlohmann::json ranks = nlohmann::json::array();
  for (const auto& s : r.samples) ranks.push_back({s.rank_mixed, s.rank_gauss});
  j["ranks"] = ranks;
}

// Flow diagnostic ---------------------------------------------------------------

struct FlowPoint {
  Vec x{0.0, 0.0, 0.0};
  double t = 0.0;
  double discrepancy = 0.0;  // |Th(z) - (2 pi)^n h(d_eta Phi(z, nu))|
  double bound = 0.0;        // ||h^||_1 |z| (1 + gamma)
  double ratio = 0.0;
};

struct FlowReport {
  double l1_hat = 0.0;
  double gamma = 0.0;
  std::vector<FlowPoint> points;
  double max_ratio = 0.0;
};

/// Compares Th(z) with (2 pi)^n h(d_eta Phi(z, nu)) at each z. h^ must live in
/// the cone of half-aperture `aperture` around nu with |eta| >= 1/2; the
/// operator must satisfy a(0, eta) = 1 and Phi(0, eta) = 0 there.
inline FlowReport flow_diagnostic(const StandardFormFIO& T, const SampledField& h, const Vec& nu,
                                  const std::vector<std::pair<Vec, double>>& zs, double aperture = kPi / 3.0) {
  require(std::abs(norm(nu) - 1.0) < 1e-12, "flow_diagnostic: nu must be a unit vector");
  require_same_grid(T.grid, h.grid, "flow_diagnostic");
  const Spectrum spec = forward(h);
  const PeriodicGrid& g = h.grid;
  FlowReport rep;
  const Vec origin{0.0, 0.0, 0.0};
  double cmax = 0.0;
  for (const auto& c : spec.coeffs) cmax = std::max(cmax, std::abs(c));
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    const cplx c = spec.coeffs[i];
    if (std::abs(c) <= 1e-14 * cmax) continue;
    const Vec eta = g.frequency(i);
    const double r = norm(eta);
    if (r < 0.5) throw SupportError("flow_diagnostic: h^ must vanish for |eta| < 1/2");
    const Vec hat = (1.0 / r) * eta;
    if (std::acos(std::clamp(dot(hat, nu), -1.0, 1.0)) > aperture + 1e-12)
      throw SupportError("flow_diagnostic: h^ must be supported in the cone around nu");
    if (std::abs(T.phase(origin, 0.0, eta)) > 1e-9 * r)
      throw DomainError("flow_diagnostic: normalization Phi(0, eta) = 0 fails");
    if (std::abs(T.symbol(g, origin, eta) - 1.0) > 1e-12)
      throw DomainError("flow_diagnostic: normalization a(0, eta) = 1 fails");
    rep.l1_hat += std::abs(c);
    rep.gamma = std::max(rep.gamma, norm(hat - nu) * r);
  }
  rep.l1_hat *= std::pow(kTwoPi, g.dim());  // int |h^| = sum |L^n c| (2 pi / L)^n
  const double scale = std::pow(kTwoPi, g.dim());
  for (const auto& [x, t] : zs) {
    FlowPoint fp;
    fp.x = x;
    fp.t = t;
    const cplx lhs = apply_fio_at(T, spec, x, t);
    const Vec target = T.phase.eta_gradient(x, t, nu);
    const cplx rhs = scale * evaluate_at(spec, target);
    fp.discrepancy = std::abs(lhs - rhs);
    const double zn = std::sqrt(dot(x, x) + t * t);
    fp.bound = rep.l1_hat * zn * (1.0 + rep.gamma);
    fp.ratio = zn == 0.0 ? 0.0 : fp.discrepancy / fp.bound;
    rep.max_ratio = std::max(rep.max_ratio, fp.ratio);
    rep.points.push_back(fp);
  }
  return rep;
}

}  // namespace hfio
