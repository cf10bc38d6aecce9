#pragma once

// H^{s,p}_FIO norms on the periodic emulation of R^n: the continuous
// wave-packet characterization, the discrete cap characterization on a
// dyadic annulus, and the anisotropic atom check.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/caps.hpp"
#include "hfio/errors.hpp"
#include "hfio/exponents.hpp"
#include "hfio/spectral.hpp"
#include "hfio/wavepacket.hpp"

namespace hfio {

namespace detail {

/// Nonzero coefficients of a spectrum, kept by flat index.
struct SparseSpectrum {
  std::vector<std::uint32_t> index;
  std::vector<cplx> coeff;
  std::vector<Vec> freq;
  double max_abs = 0.0;
};

inline SparseSpectrum sparsify(const Spectrum& s, double rel_tol) {
  SparseSpectrum out;
  for (const auto& c : s.coeffs) out.max_abs = std::max(out.max_abs, std::abs(c));
  if (out.max_abs == 0.0) return out;
  const double cut = rel_tol * out.max_abs;
  for (std::size_t i = 0; i < s.coeffs.size(); ++i)
    if (std::abs(s.coeffs[i]) > cut) {
      out.index.push_back(static_cast<std::uint32_t>(i));
      out.coeff.push_back(s.coeffs[i]);
      out.freq.push_back(s.grid.frequency(i));
    }
  return out;
}

/// Weighted selection of sparse entries feeding one synthesized piece.
struct Bucket {
  std::vector<std::uint32_t> slot;
  std::vector<double> weight;
};

/// For each bucket, synthesize sum_slot weight * coeff e^{i xi x} and return
/// sum_j |.|^p cell for every requested p.
inline std::vector<std::vector<double>> bucket_lp_pows(const PeriodicGrid& g, const SparseSpectrum& sp,
                                                       const std::vector<Bucket>& buckets,
                                                       const std::vector<double>& ps) {
  std::vector<std::vector<double>> out(buckets.size(), std::vector<double>(ps.size(), 0.0));
  std::vector<cplx> buf(g.size());
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    const auto& bk = buckets[b];
    if (bk.slot.empty()) continue;
    std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
    for (std::size_t j = 0; j < bk.slot.size(); ++j) buf[sp.index[bk.slot[j]]] = sp.coeff[bk.slot[j]] * bk.weight[j];
    synthesize_inplace(g, buf);
    for (std::size_t q = 0; q < ps.size(); ++q) out[b][q] = lp_norm_pow(buf, ps[q], g.cell_volume());
  }
  return out;
}

/// Parseval shortcut of bucket_lp_pows at p = 2.
inline std::vector<double> bucket_l2_pows(const PeriodicGrid& g, const SparseSpectrum& sp,
                                          const std::vector<Bucket>& buckets) {
  std::vector<double> out(buckets.size(), 0.0);
  for (std::size_t b = 0; b < buckets.size(); ++b)
    for (std::size_t j = 0; j < buckets[b].slot.size(); ++j)
      out[b] += std::norm(sp.coeff[buckets[b].slot[j]] * buckets[b].weight[j]);
  for (auto& v : out) v *= g.volume();
  return out;
}

/// Candidate direction indices whose packet may be nonzero at unit vector `hat`
/// with angular chord reach `reach`.
inline void direction_candidates(const DirectionSet& dirs, const Vec& hat, double reach, std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t m = dirs.size();
  if (dirs.equispaced_circle && reach < 2.0) {
    const double half_angle = 2.0 * std::asin(reach / 2.0);
    const double a = std::atan2(hat[1], hat[0]);
    const double step = kTwoPi / static_cast<double>(m);
    const long lo = static_cast<long>(std::floor((a - half_angle) / step));
    const long hi = static_cast<long>(std::ceil((a + half_angle) / step));
    if (hi - lo + 1 >= static_cast<long>(m)) {
      for (std::size_t i = 0; i < m; ++i) out.push_back(i);
      return;
    }
    const long mm = static_cast<long>(m);
    for (long j = lo; j <= hi; ++j) out.push_back(static_cast<std::size_t>(((j % mm) + mm) % mm));
    return;
  }
  for (std::size_t i = 0; i < m; ++i)
    if (norm(hat - dirs.nodes[i]) < reach) out.push_back(i);
}

inline void check_frame(const PeriodicGrid& g, const WavePacketFrame& frame, const DirectionSet& dirs) {
  if (frame.dim() != g.dim() || dirs.dim != g.dim())
    throw GridMismatch("hfio_norm: frame, direction set and grid dimensions differ");
}

}  // namespace detail

/// Relative coefficient threshold below which spectral entries are ignored.
inline constexpr double kSupportTolerance = 1e-13;

struct HfioNormParts {
  double p = 2.0;
  double low = 0.0;          // ||q(D) <D>^s f||_p
  double directional = 0.0;  // (sum_i w_i ||phi_i(D) <D>^s f||_p^p)^{1/p}
  double value = 0.0;
};

/// hfio_norm for several exponents at once, sharing the packet evaluations.
inline std::vector<HfioNormParts> hfio_norm_parts(const SampledField& f, double s, const std::vector<double>& ps,
                                                  const WavePacketFrame& frame, const DirectionSet& dirs) {
  for (double p : ps) require_exponent(p);
  detail::check_frame(f.grid, frame, dirs);
  const PeriodicGrid& g = f.grid;
  Spectrum spec = forward(f);
  if (s != 0.0)
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) spec.coeffs[i] *= std::pow(bracket(norm(g.frequency(i))), s);

  std::vector<HfioNormParts> out(ps.size());
  for (std::size_t q = 0; q < ps.size(); ++q) out[q].p = ps[q];

  const auto sp = detail::sparsify(spec, kSupportTolerance);
  if (sp.index.empty()) return out;

  // Low-frequency part: q(D) on the sparse support.
  detail::Bucket low;
  for (std::size_t j = 0; j < sp.index.size(); ++j) {
    const double w = WavePacketFrame::q_cutoff(norm(sp.freq[j]));
    if (w != 0.0) {
      low.slot.push_back(static_cast<std::uint32_t>(j));
      low.weight.push_back(w);
    }
  }

  // Directional pieces.
  std::vector<detail::Bucket> pieces(dirs.size());
  std::vector<std::size_t> cand;
  for (std::size_t j = 0; j < sp.index.size(); ++j) {
    const double r = norm(sp.freq[j]);
    if (r <= 0.125) continue;
    const Vec hat = (1.0 / r) * sp.freq[j];
    const double reach = WavePacketFrame::angular_reach(r);
    detail::direction_candidates(dirs, hat, reach, cand);
    for (auto i : cand) {
      const double v = frame.packet_fast(r, norm(hat - dirs.nodes[i]));
      if (v != 0.0) {
        pieces[i].slot.push_back(static_cast<std::uint32_t>(j));
        pieces[i].weight.push_back(v);
      }
    }
  }

  std::vector<double> nonquadratic;
  for (double p : ps)
    if (p != 2.0) nonquadratic.push_back(p);

  const std::vector<detail::Bucket> low_only{low};
  std::vector<std::vector<double>> low_pows, piece_pows;
  if (!nonquadratic.empty()) {
    low_pows = detail::bucket_lp_pows(g, sp, low_only, nonquadratic);
    piece_pows = detail::bucket_lp_pows(g, sp, pieces, nonquadratic);
  }
  const auto low_l2 = detail::bucket_l2_pows(g, sp, low_only);
  const auto piece_l2 = detail::bucket_l2_pows(g, sp, pieces);

  std::size_t col = 0;
  for (std::size_t q = 0; q < ps.size(); ++q) {
    const double p = ps[q];
    double low_pow = 0.0, dir_pow = 0.0;
    if (p == 2.0) {
      low_pow = low_l2[0];
      for (std::size_t i = 0; i < dirs.size(); ++i) dir_pow += dirs.weights[i] * piece_l2[i];
    } else {
      low_pow = low_pows[0][col];
      for (std::size_t i = 0; i < dirs.size(); ++i)
        if (!pieces[i].slot.empty()) dir_pow += dirs.weights[i] * piece_pows[i][col];
      ++col;
    }
    out[q].low = std::pow(low_pow, 1.0 / p);
    out[q].directional = std::pow(dir_pow, 1.0 / p);
    out[q].value = out[q].low + out[q].directional;
  }
  return out;
}

/// ||q(D)<D>^s f||_p + (sum_i w_i ||phi_{omega_i}(D)<D>^s f||_p^p)^{1/p}.
inline double hfio_norm(const SampledField& f, double s, double p, const WavePacketFrame& frame,
                        const DirectionSet& dirs) {
  return hfio_norm_parts(f, s, {p}, frame, dirs)[0].value;
}

inline std::vector<double> hfio_norms(const SampledField& f, double s, const std::vector<double>& ps,
                                      const WavePacketFrame& frame, const DirectionSet& dirs) {
  std::vector<double> out;
  for (const auto& part : hfio_norm_parts(f, s, ps, frame, dirs)) out.push_back(part.value);
  return out;
}

/// Fraction of the coefficient l^2 mass lying outside 2^{k-1} <= |xi| <= 2^{k+1}.
inline double annulus_leakage(const Spectrum& s, int k) {
  const double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k + 1);
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const double m = std::norm(s.coeffs[i]);
    total += m;
    const double r = norm(s.grid.frequency(i));
    if (r < lo || r > hi) outside += m;
  }
  return total == 0.0 ? 0.0 : outside / total;
}

inline void require_annulus(const Spectrum& s, int k, const char* where) {
  const double leak = annulus_leakage(s, k);
  if (leak > 1e-10)
    throw SupportError(std::string(where) + ": field is not supported in the level-" + std::to_string(k) +
                       " annulus (relative mass outside " + std::to_string(leak) + ")");
}

/// Sparse support of f split into the angular pieces chi_nu(D) f.
struct CapSplit {
  detail::SparseSpectrum support;
  std::vector<detail::Bucket> pieces;  // one per cap
};

inline CapSplit split_by_caps(const Spectrum& spec, const CapSystem& caps) {
  if (caps.dim() != spec.grid.dim()) throw GridMismatch("split_by_caps: cap system and grid dimensions differ");
  CapSplit out;
  out.support = detail::sparsify(spec, kSupportTolerance);
  out.pieces.resize(caps.size());
  for (std::size_t j = 0; j < out.support.index.size(); ++j) {
    const Vec& xi = out.support.freq[j];
    const double r = norm(xi);
    if (r == 0.0) {
      for (std::size_t nu = 0; nu < caps.size(); ++nu) {
        out.pieces[nu].slot.push_back(static_cast<std::uint32_t>(j));
        out.pieces[nu].weight.push_back(1.0 / static_cast<double>(caps.size()));
      }
      continue;
    }
    const Vec hat = (1.0 / r) * xi;
    const auto near = caps.nearby(hat);
    double total = 0.0;
    for (auto nu : near) total += caps.bump(nu, hat);
    for (auto nu : near) {
      out.pieces[nu].slot.push_back(static_cast<std::uint32_t>(j));
      out.pieces[nu].weight.push_back(caps.bump(nu, hat) / total);
    }
  }
  return out;
}

/// (sum_nu ||chi_nu(D) f||_p^p)^{1/p} for f supported in the level-k annulus.
inline double discrete_annulus_norm(const SampledField& f, int k, double p, const CapSystem& caps) {
  require_exponent(p);
  const Spectrum spec = forward(f);
  require_annulus(spec, k, "discrete_annulus_norm");
  const CapSplit split = split_by_caps(spec, caps);
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : detail::bucket_l2_pows(f.grid, split.support, split.pieces)) acc += v;
  } else {
    for (const auto& row : detail::bucket_lp_pows(f.grid, split.support, split.pieces, {p})) acc += row[0];
  }
  return std::pow(acc, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Atoms

struct AtomDescriptor {
  Vec center{0.0, 0.0, 0.0};
  Vec direction{1.0, 0.0, 0.0};
  double tau = 0.25;
  double s = 0.0;

  void validate(int dim) const {
    require(std::abs(norm(direction) - 1.0) < 1e-12, "AtomDescriptor: direction must be a unit vector");
    require(tau > 0.0 && tau <= 1.0, "AtomDescriptor: tau must lie in (0, 1]");
    if (dim == 2) require(direction[2] == 0.0, "AtomDescriptor: planar direction expected in two dimensions");
  }
};

/// M^nu_tau(xi) = (1 + tau^{-2} (<xi>^{-1} + min(|xi^ - nu|^2, |xi^ + nu|^2))^2)^{n/2};
/// at xi = 0 the angular term is taken as 0.
inline double atom_weight(const Vec& xi, const Vec& nu, double tau, int dim) {
  const double r = norm(xi);
  double ang = 0.0;
  if (r > 0.0) {
    const Vec hat = (1.0 / r) * xi;
    const double a = norm(hat - nu), b = norm(hat + nu);
    ang = std::min(a * a, b * b);
  }
  const double inner = 1.0 / bracket(r) + ang;
  return std::pow(1.0 + inner * inner / (tau * tau), 0.5 * dim);
}

struct AtomReport {
  double outside_fraction = 0.0;  // |f|^2 mass outside the anisotropic ball
  bool support_pass = true;
  double weighted_norm = 0.0;     // ||<D>^s M(D) f||_2
  double budget = 0.0;            // tau^{-n/2}
  bool norm_pass = true;
  bool pass = true;
};

inline void to_json(nlohmann::json& j, const AtomReport& r) {
  j = nlohmann::json{{"support", {{"outside_fraction", r.outside_fraction}, {"pass", r.support_pass}}},
                     {"weighted_norm", {{"value", r.weighted_norm}, {"budget", r.budget}, {"pass", r.norm_pass}}},
                     {"pass", r.pass}};
}

/// Shortest periodic displacement x - y.
inline Vec periodic_displacement(const PeriodicGrid& g, const Vec& x, const Vec& y) {
  Vec d = x - y;
  const double L = g.period();
  for (int a = 0; a < g.dim(); ++a) d[a] -= L * std::round(d[a] / L);
  return d;
}

inline double atom_weighted_norm(const SampledField& f, const AtomDescriptor& atom) {
  const Spectrum spec = forward(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    const Vec xi = f.grid.frequency(i);
    const double m = atom_weight(xi, atom.direction, atom.tau, f.grid.dim()) * std::pow(bracket(norm(xi)), atom.s);
    acc += std::norm(spec.coeffs[i]) * m * m;
  }
  return std::sqrt(acc * f.grid.volume());
}

inline AtomReport atom_check(const SampledField& f, const AtomDescriptor& atom) {
  atom.validate(f.grid.dim());
  AtomReport rep;
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double m = std::norm(f.values[i]);
    if (m == 0.0) continue;
    total += m;
    const Vec d = periodic_displacement(f.grid, f.grid.position(i), atom.center);
    if (std::abs(dot(atom.direction, d)) + dot(d, d) > atom.tau) outside += m;
  }
  rep.outside_fraction = total == 0.0 ? 0.0 : outside / total;
  rep.support_pass = rep.outside_fraction <= 1e-8;
  rep.weighted_norm = total == 0.0 ? 0.0 : atom_weighted_norm(f, atom);
  rep.budget = std::pow(atom.tau, -0.5 * f.grid.dim());
  rep.norm_pass = rep.weighted_norm <= rep.budget;
  rep.pass = rep.support_pass && rep.norm_pass;
  return rep;
}

/// Tube-shaped packet adapted to the atom: thickness tau along nu, width
/// sqrt(tau) across it, modulated at frequency nu / tau, scaled so that its
/// weighted norm equals fraction * tau^{-n/2}.
inline SampledField canonical_atom(const PeriodicGrid& g, const AtomDescriptor& atom, double fraction = 0.9) {
  atom.validate(g.dim());
  const double along = 0.5 * atom.tau, across = 0.5 * std::sqrt(atom.tau);
  auto bump = [](double t) { return t >= 1.0 ? 0.0 : 1.0 - smooth_step(t); };
  SampledField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec d = periodic_displacement(g, g.position(i), atom.center);
    const double a = dot(atom.direction, d);
    const Vec perp = d - a * atom.direction;
    const double amp = bump(std::abs(a) / along) * bump(norm(perp) / across);
    if (amp != 0.0) f.values[i] = amp * std::exp(cplx(0.0, a / atom.tau));
  }
  const double w = atom_weighted_norm(f, atom);
  if (w == 0.0) throw ResolutionError("canonical_atom: grid too coarse to resolve the atom");
  f *= cplx(fraction * std::pow(atom.tau, -0.5 * g.dim()) / w);
  return f;
}

}  // namespace hfio
