#pragma once

// l^p decoupling norms of standard-form operators over the caps of Theta_k,
// the matching square function, and the Wolff-type slope experiment.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/caps.hpp"
#include "hfio/exponents.hpp"
#include "hfio/fio_norms.hpp"
#include "hfio/fio_ops.hpp"
#include "hfio/quadrature.hpp"

namespace hfio {

/// ||Tf||_p, (sum_nu ||T chi_nu f||_p^p)^{1/p} and ||(sum_nu |T chi_nu f|^2)^{1/2}||_p.
struct DecouplingValues {
  double lhs = 0.0;
  double decoupling = 0.0;
  double square_function = 0.0;
  std::size_t active_caps = 0;
};

namespace detail {

/// Space-time slice of T applied to sparse coefficients at time index ti.
inline void fio_slice(const StandardFormFIO& T, const SparseSpectrum& sp, const Bucket* piece,
                      const std::vector<double>& spatial, double t, std::vector<cplx>& buf) {
  const PeriodicGrid& g = T.grid;
  const double scale = std::pow(kTwoPi, g.dim());
  std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
  auto put = [&](std::uint32_t slot, double w) {
    const Vec& eta = sp.freq[slot];
    buf[sp.index[slot]] = scale * w * T.symbol.frequency(eta) * sp.coeff[slot] * std::polar(1.0, t * T.phase.time_symbol(eta));
  };
  if (piece) {
    for (std::size_t j = 0; j < piece->slot.size(); ++j) put(piece->slot[j], piece->weight[j]);
  } else {
    for (std::size_t j = 0; j < sp.index.size(); ++j) put(static_cast<std::uint32_t>(j), 1.0);
  }
  synthesize_inplace(g, buf);
  if (!spatial.empty())
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= spatial[i];
}

inline DecouplingValues decoupling_values_impl(const StandardFormFIO& T, const SampledField& f, int k, double p,
                                               const CapSystem& caps, const std::vector<std::size_t>* subset) {
  require_exponent(p);
  require_same_grid(T.grid, f.grid, "decoupling_norm");
  const Spectrum spec = forward(f);
  require_annulus(spec, k, "decoupling_norm");
  if (!T.phase.has_time_symbol())
    throw DomainError("decoupling_norm: phase must be of the form x.eta + t h(eta)");
  const CapSplit split = split_by_caps(spec, caps);
  std::vector<std::size_t> active;
  if (subset) {
    for (auto nu : *subset)
      if (!split.pieces.at(nu).slot.empty()) active.push_back(nu);
  } else {
    for (std::size_t nu = 0; nu < caps.size(); ++nu)
      if (!split.pieces[nu].slot.empty()) active.push_back(nu);
  }
  const PeriodicGrid& g = T.grid;
  std::vector<double> spatial;
  if (T.symbol.support_radius) {
    spatial.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) spatial[i] = T.symbol.spatial(g, g.position(i));
  }
  DecouplingValues v;
  v.active_caps = active.size();
  std::vector<cplx> buf(g.size());
  std::vector<double> sq(g.size());
  double lhs = 0.0, dec = 0.0, sqf = 0.0;
  const double cell = g.cell_volume();
  for (std::size_t ti = 0; ti < T.times.t.size(); ++ti) {
    const double t = T.times.t[ti], w = T.times.w[ti];
    fio_slice(T, split.support, nullptr, spatial, t, buf);
    lhs += w * lp_norm_pow(buf, p, cell);
    std::fill(sq.begin(), sq.end(), 0.0);
    for (auto nu : active) {
      fio_slice(T, split.support, &split.pieces[nu], spatial, t, buf);
      dec += w * lp_norm_pow(buf, p, cell);
      for (std::size_t i = 0; i < buf.size(); ++i) sq[i] += std::norm(buf[i]);
    }
    double acc = 0.0;
    for (double s2 : sq) acc += std::pow(s2, 0.5 * p);
    sqf += w * acc * cell;
  }
  v.lhs = std::pow(lhs, 1.0 / p);
  v.decoupling = std::pow(dec, 1.0 / p);
  v.square_function = std::pow(sqf, 1.0 / p);
  return v;
}

}  // namespace detail

/// All three quantities in one pass over time nodes and caps.
inline DecouplingValues decoupling_values(const StandardFormFIO& T, const SampledField& f, int k, double p,
                                          const CapSystem& caps) {
  return detail::decoupling_values_impl(T, f, k, p, caps, nullptr);
}

/// Same with the cap sum restricted to `subset`.
inline DecouplingValues decoupling_values(const StandardFormFIO& T, const SampledField& f, int k, double p,
                                          const CapSystem& caps, const std::vector<std::size_t>& subset) {
  return detail::decoupling_values_impl(T, f, k, p, caps, &subset);
}

inline double decoupling_norm(const StandardFormFIO& T, const SampledField& f, int k, double p, const CapSystem& caps) {
  return decoupling_values(T, f, k, p, caps).decoupling;
}

inline double square_function_norm(const StandardFormFIO& T, const SampledField& f, int k, double p,
                                   const CapSystem& caps) {
  return decoupling_values(T, f, k, p, caps).square_function;
}

// Wolff-type experiment ---------------------------------------------------------

struct WolffSetup {
  PhaseFunction phase;
  SymbolFunction symbol;
  TimeSamples times;
  double order = 0.0;  // m in the FIO-norm index m + d(p) - s(p) + eps
};

struct DecouplingReport {
  std::vector<int> ks;
  std::vector<double> lhs, dec_norm, sq_norm, hfio_norm, l2_norm;
  LinearFit dec_ratio_fit;    // log2(lhs / dec_norm) against k
  LinearFit hfio_ratio_fit;   // log2(lhs / hfio_norm) against k
  double predicted_dec_bound = 0.0;  // d(p) + eps
  double tolerance = 0.1;
  bool degenerate = false;
  bool dec_pass = false;
  bool hfio_pass = false;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const DecouplingReport& r) {
  j = nlohmann::json{{"k", r.ks},
                     {"lhs", r.lhs},
                     {"dec_norm", r.dec_norm},
                     {"sq_norm", r.sq_norm},
                     {"hfio_norm", r.hfio_norm},
                     {"l2_norm", r.l2_norm},
                     {"dec_ratio_slope", r.dec_ratio_fit.slope},
                     {"dec_ratio_residual", r.dec_ratio_fit.residual},
                     {"hfio_ratio_slope", r.hfio_ratio_fit.slope},
                     {"hfio_ratio_residual", r.hfio_ratio_fit.residual},
                     {"dec_slope_bound", r.predicted_dec_bound + r.tolerance},
                     {"hfio_slope_bound", r.tolerance},
                     {"degenerate", r.degenerate},
                     {"pass", r.pass}};
}

/// For each k: data = family(k), T on data's grid; records ||Tf||_p, the
/// decoupling and square-function norms, hfio_norm(f, m + d - s + eps, p) and
/// ||f||_2, then fits log2-slopes of the two ratios.
inline DecouplingReport wolff_experiment(const WolffSetup& setup, const std::function<SampledField(int)>& family,
                                         int n, Rational p, const std::vector<int>& ks, double eps,
                                         const WavePacketFrame& frame, const DirectionSet& dirs,
                                         const std::function<CapSystem(int)>& caps_for = nullptr) {
  if (ks.size() < 3) throw DomainError("wolff_experiment: need at least three levels for a slope fit");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw DomainError("wolff_experiment: k ladder must be strictly increasing");
  const ExponentTable ex = exponents(n, p);
  const double pv = p.value();
  DecouplingReport rep;
  rep.ks = ks;
  rep.predicted_dec_bound = ex.d.value() + eps;
  for (int k : ks) {
    const SampledField f = family(k);
    const CapSystem caps = caps_for ? caps_for(k) : build_caps(k, n);
    StandardFormFIO T{setup.phase, setup.symbol, f.grid, setup.times};
    const DecouplingValues v = decoupling_values(T, f, k, pv, caps);
    rep.lhs.push_back(v.lhs);
    rep.dec_norm.push_back(v.decoupling);
    rep.sq_norm.push_back(v.square_function);
    rep.hfio_norm.push_back(hfio_norm(f, setup.order + ex.d_minus_s.value() + eps, pv, frame, dirs));
    rep.l2_norm.push_back(lp_norm(f, 2.0));
  }
  std::vector<double> x, r1, r2;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (rep.lhs[i] <= 0.0 || rep.dec_norm[i] <= 0.0 || rep.hfio_norm[i] <= 0.0) {
      rep.degenerate = true;
      continue;
    }
    x.push_back(ks[i]);
    r1.push_back(std::log2(rep.lhs[i] / rep.dec_norm[i]));
    r2.push_back(std::log2(rep.lhs[i] / rep.hfio_norm[i]));
  }
  if (rep.degenerate || x.size() < 3) {
    rep.degenerate = true;
    return rep;
  }
  rep.dec_ratio_fit = least_squares(x, r1);
  rep.hfio_ratio_fit = least_squares(x, r2);
  rep.dec_pass = rep.dec_ratio_fit.slope <= rep.predicted_dec_bound + rep.tolerance;
  rep.hfio_pass = rep.hfio_ratio_fit.slope <= rep.tolerance;
  rep.pass = rep.dec_pass && rep.hfio_pass;
  return rep;
}

}  // namespace hfio
