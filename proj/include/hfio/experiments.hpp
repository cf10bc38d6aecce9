#pragma once

// Config-driven experiments producing a summary.json and CSV tables.
//
// Config (schema_version 1):
//   {"schema_version": 1, "seed": 7, "directions": 256,
//    "experiments": [{"kind": "sharpness", "name": "...", "params": {...}}]}

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfio/caps.hpp"
#include "hfio/decoupling.hpp"
#include "hfio/errors.hpp"
#include "hfio/exponents.hpp"
#include "hfio/families.hpp"
#include "hfio/fio_norms.hpp"
#include "hfio/fio_ops.hpp"
#include "hfio/io.hpp"
#include "hfio/torus.hpp"
#include "hfio/wavepacket.hpp"

namespace hfio {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ExperimentResult {
  std::string name;
  std::string kind;
  std::map<std::string, bool> verdicts;
  json summary = json::object();
  std::map<std::string, CsvTable> tables;

  bool pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.second; });
  }
};

struct ResourceCaps {
  int max_points_2d = 1024;
  int max_points_3d = 128;
};

/// Shared state for one run: the frame is built on first use.
class ExperimentContext {
public:
  ExperimentContext(std::uint64_t seed, int directions, ResourceCaps caps = {})
      : seed_(seed), directions_(directions), caps_(caps) {}

  std::uint64_t seed() const { return seed_; }
  const ResourceCaps& caps() const { return caps_; }
  const WavePacketFrame& frame(int dim) {
    auto& slot = frames_[dim];
    if (!slot) {
      FrameConfig cfg;
      cfg.dim = dim;
      slot = std::make_unique<WavePacketFrame>(cfg);
    }
    return *slot;
  }
  const DirectionSet& directions(int dim) {
    auto it = dirs_.find(dim);
    if (it == dirs_.end()) it = dirs_.emplace(dim, DirectionSet::for_dimension(dim, directions_)).first;
    return it->second;
  }
  void check_grid(const PeriodicGrid& g) const {
    const int cap = g.dim() == 2 ? caps_.max_points_2d : caps_.max_points_3d;
    if (g.points() > cap)
      throw ResourceLimit("grid of " + std::to_string(g.points()) + " points per axis exceeds the cap of " +
                          std::to_string(cap) + "; lower the largest k or the grid octaves in the config");
  }

private:
  std::uint64_t seed_;
  int directions_;
  ResourceCaps caps_;
  std::map<int, std::unique_ptr<WavePacketFrame>> frames_;
  std::map<int, DirectionSet> dirs_;
};

namespace detail {

template <class T>
T param(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: parameter '") + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline std::vector<int> k_range(const json& p, std::vector<int> fallback) {
  auto ks = param(p, "ks", fallback);
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw DomainError("config: 'ks' must be strictly increasing");
  return ks;
}

inline PacketFamilySpec family_spec(const json& p, int dim, const std::vector<int>& ks) {
  PacketFamilySpec spec;
  spec.dim = dim;
  spec.ks = ks;
  const json f = p.contains("family") ? p["family"] : json::object();
  if (f.is_string()) {
    spec.kind = parse_family_kind(f.get<std::string>());
    return spec;
  }
  spec.kind = parse_family_kind(param<std::string>(f, "kind", "focusing"));
  spec.aperture = param(f, "aperture", spec.aperture);
  spec.focusing_radius = param(f, "focusing_radius", spec.focusing_radius);
  spec.unit_radius = param(f, "unit_radius", spec.unit_radius);
  spec.grid.period = param(f, "period", spec.grid.period);
  spec.grid.extra_octaves = param(f, "extra_octaves", spec.grid.extra_octaves);
  spec.validate();
  return spec;
}

inline TimeSamples time_samples(const json& p, double t0, double t1, int nodes) {
  const json t = p.contains("times") ? p["times"] : json::object();
  const std::string kind = param<std::string>(t, "kind", "clustered");
  if (kind == "uniform")
    return TimeSamples::uniform(param(t, "t0", t0), param(t, "t1", t1), param(t, "nodes", nodes));
  if (kind == "clustered") {
    const double a = param(t, "t0", t0), b = param(t, "t1", t1);
    return TimeSamples::clustered(0.5 * (a + b), 0.5 * (b - a), param(t, "nodes", nodes), param(t, "alpha", 5.0));
  }
  throw DomainError("config: unknown time sampling '" + kind + "'");
}

inline double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

inline json slope_json(const SlopeReport& r) { return json(r); }

}  // namespace detail

// Individual experiments ---------------------------------------------------------

/// hfio_norm / ||f||_p over random annulus fields, on R^n emulation and optionally on the torus.
inline ExperimentResult experiment_norms(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const auto ks = detail::k_range(p, {3, 4, 5, 6, 7});
  const int per_k = detail::param(p, "fields_per_k", 10);
  const auto ps = detail::param(p, "ps", std::vector<double>{2.0});
  const double s = detail::param(p, "s", 0.0);
  const bool torus = detail::param(p, "torus", false);
  const int torus_fields = detail::param(p, "torus_fields_per_k", 2);
  const double window = detail::param(p, "spread_limit", 4.0);
  std::mt19937_64 rng(ctx.seed());
  const auto& frame = ctx.frame(n);
  const auto& dirs = ctx.directions(n);
  CsvTable table{{"k", "field", "p", "hfio_norm", "lp_norm", "ratio"}, {}};
  CsvTable ttable{{"k", "field", "hfio_norm_torus", "l2_norm", "ratio"}, {}};
  std::map<double, std::vector<double>> ratios;
  std::vector<double> tor;
  for (int k : ks) {
    int N = 8;
    while (N < (1 << (k + 3))) N *= 2;
    const PeriodicGrid g(n, N, kTwoPi);
    ctx.check_grid(g);
    for (int i = 0; i < per_k; ++i) {
      const SampledField f = random_annulus_field(g, k, rng);
      const auto vals = hfio_norms(f, s, ps, frame, dirs);
      for (std::size_t q = 0; q < ps.size(); ++q) {
        const double lp = lp_norm(f, ps[q]);
        ratios[ps[q]].push_back(vals[q] / lp);
        table.add({double(k), double(i), ps[q], vals[q], lp, vals[q] / lp});
      }
      if (torus && i < torus_fields) {
        AtlasConfig ac;
        ac.step_points = N / 8;
        const TorusAtlas atlas(g, ac);
        const double h = hfio_norm_torus(f, 0.0, 2.0, atlas, frame, dirs);
        const double l2 = lp_norm(f, 2.0);
        tor.push_back(h / l2);
        ttable.add({double(k), double(i), h, l2, h / l2});
      }
    }
  }
  for (const auto& [pp, v] : ratios) {
    const double sp = detail::spread(v);
    res.summary["spread"][std::to_string(pp)] = sp;
    if (pp == 2.0) res.verdicts["l2_equivalence"] = sp <= window;
  }
  res.tables["ratios"] = table;
  if (torus) {
    res.summary["torus_spread"] = detail::spread(tor);
    res.verdicts["torus_l2_equivalence"] = detail::spread(tor) <= window;
    res.tables["torus_ratios"] = ttable;
  }
  return res;
}

/// Decoupling and square-function norms at one level, with exact structural checks.
inline ExperimentResult experiment_decouple(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const int k = detail::param(p, "k", 5);
  const double pv = detail::param(p, "p", 6.0);
  const auto spec = detail::family_spec(p, n, {k, k + 1, k + 2});
  const PhaseFunction phase = make_phase(detail::param<std::string>(p, "phase", "half_wave"), n,
                                         p.contains("phase_params") ? p["phase_params"] : json::object());
  const TimeSamples ts = detail::time_samples(p, -1.0, 1.0, 33);
  const CapSystem caps = build_caps(k, n);
  const SampledField f = make_family(spec, k, caps);
  ctx.check_grid(f.grid);
  const StandardFormFIO T{phase, SymbolFunction::unit(), f.grid, ts};
  const auto v = decoupling_values(T, f, k, pv, caps);
  std::vector<std::size_t> half;
  const auto inside = cone_caps(spec, caps);
  for (std::size_t i = 0; i < inside.size(); i += 2) half.push_back(inside[i]);
  const auto vh = decoupling_values(T, f, k, pv, caps, half);
  const double holder = std::pow(static_cast<double>(std::max<std::size_t>(v.active_caps, 1)), 0.5 - 1.0 / pv);
  res.summary = {{"k", k},
                 {"p", pv},
                 {"lhs", v.lhs},
                 {"dec_norm", v.decoupling},
                 {"sq_norm", v.square_function},
                 {"active_caps", v.active_caps},
                 {"dec_norm_half_caps", vh.decoupling}};
  res.verdicts["monotone_under_dropping_caps"] = vh.decoupling <= v.decoupling * (1.0 + 1e-12);
  if (pv >= 2.0) res.verdicts["square_function_holder"] = v.square_function <= holder * v.decoupling * (1.0 + 1e-12);
  CsvTable t{{"k", "lhs", "dec_norm", "sq_norm", "active_caps"}, {}};
  t.add({double(k), v.lhs, v.decoupling, v.square_function, double(v.active_caps)});
  res.tables["decoupling"] = t;
  return res;
}

inline ExperimentResult experiment_wolff(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const auto ks = detail::k_range(p, {3, 4, 5, 6, 7});
  const Rational pr = parse_rational(detail::param<std::string>(p, "p", "6"));
  const double eps = detail::param(p, "eps", 0.1);
  const auto spec = detail::family_spec(p, n, ks);
  WolffSetup setup{make_phase(detail::param<std::string>(p, "phase", "half_wave"), n,
                              p.contains("phase_params") ? p["phase_params"] : json::object()),
                   SymbolFunction::unit(), detail::time_samples(p, -1.0, 1.0, 33), 0.0};
  for (int k : ks) ctx.check_grid(spec.grid.grid(k, n));
  std::map<int, CapSystem> caps;
  for (int k : ks) caps.emplace(k, build_caps(k, n));
  const auto rep = wolff_experiment(
      setup, [&](int k) { return make_family(spec, k, caps.at(k)); }, n, pr, ks, eps, ctx.frame(n), ctx.directions(n),
      [&](int k) { return caps.at(k); });
  res.summary = rep;
  res.verdicts["decoupling_slope"] = rep.dec_pass;
  res.verdicts["fio_norm_slope"] = rep.hfio_pass;
  CsvTable t{{"k", "lhs", "dec_norm", "sq_norm", "hfio_norm", "l2_norm"}, {}};
  for (std::size_t i = 0; i < ks.size(); ++i)
    t.add({double(ks[i]), rep.lhs[i], rep.dec_norm[i], rep.sq_norm[i], rep.hfio_norm[i], rep.l2_norm[i]});
  res.tables["wolff"] = t;
  return res;
}

/// FIO-norm stability of e^{it|D|} against the L^p growth on focusing data
/// u0 = e^{-it|D|} f (so that e^{it|D|} u0 = f focuses).
inline ExperimentResult experiment_wave(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const auto ks = detail::k_range(p, {3, 4, 5, 6, 7});
  const auto ts = detail::param(p, "ts", std::vector<double>{0.1, 0.5, 1.0});
  const auto ps = detail::param(p, "ps", std::vector<double>{4.0, 6.0});
  const double window = detail::param(p, "spread_limit", 4.0);
  const double min_slope = detail::param(p, "min_lp_slope", 0.1);
  auto spec = detail::family_spec(p, n, ks);
  spec.kind = FamilyKind::focusing;
  const auto& frame = ctx.frame(n);
  const auto& dirs = ctx.directions(n);
  CsvTable table{{"k", "t", "p", "hfio_after", "hfio_before", "fio_ratio", "lp_after", "lp_before", "lp_ratio"}, {}};
  std::vector<double> all;
  std::map<std::pair<double, double>, std::vector<double>> lp_ratio;
  for (int k : ks) {
    const SampledField f = make_family(spec, k);
    ctx.check_grid(f.grid);
    const auto after = hfio_norms(f, 0.0, ps, frame, dirs);
    for (double t : ts) {
      const SampledField u0 = half_wave_propagator(f, -t);
      const auto before = hfio_norms(u0, 0.0, ps, frame, dirs);
      for (std::size_t q = 0; q < ps.size(); ++q) {
        const double la = lp_norm(f, ps[q]), lb = lp_norm(u0, ps[q]);
        all.push_back(after[q] / before[q]);
        lp_ratio[{t, ps[q]}].push_back(la / lb);
        table.add({double(k), t, ps[q], after[q], before[q], after[q] / before[q], la, lb, la / lb});
      }
    }
  }
  res.summary["fio_ratio_spread"] = detail::spread(all);
  res.verdicts["fio_norm_stable"] = detail::spread(all) <= window;
  double best = -1e300;
  json slopes = json::array();
  for (const auto& [key, v] : lp_ratio) {
    const auto rep = make_slope_report("lp_ratio_t" + std::to_string(key.first) + "_p" + std::to_string(key.second), ks,
                                       v, 0.0, 1e300, 1e300);
    slopes.push_back({{"t", key.first}, {"p", key.second}, {"slope", rep.slope}, {"residual", rep.residual}});
    if (key.first == *std::max_element(ts.begin(), ts.end())) best = std::max(best, rep.slope);
  }
  res.summary["lp_ratio_slopes"] = slopes;
  res.summary["lp_slope_at_largest_t"] = best;
  res.verdicts["lp_ratio_grows"] = best >= min_slope;
  res.tables["wave"] = table;
  return res;
}

/// Smooth random data on T^2 scaled to ||f1||_{W^{1/2,2}} + ||f2||_{W^{-1/2,2}} = data_norm.
inline std::pair<SampledField, SampledField> nlw_data(const PeriodicGrid& g, double data_norm, std::mt19937_64& rng) {
  SampledField f1 = random_band_field(g, 1.0, 4.0, rng);
  SampledField f2 = random_band_field(g, 1.0, 4.0, rng);
  // Real-valued data keeps the energy identity in its standard form.
  for (auto& v : f1.values) v = v.real();
  for (auto& v : f2.values) v = v.real();
  const double scale = data_norm / nlw_data_norm(f1, f2);
  f1 *= scale;
  f2 *= scale;
  return {f1, f2};
}

inline ExperimentResult experiment_nlw(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int N = detail::param(p, "N", 64);
  const PeriodicGrid g(2, N, kTwoPi);
  ctx.check_grid(g);
  NlwConfig cfg;
  cfg.t0 = detail::param(p, "t0", 0.5);
  cfg.time_nodes = detail::param(p, "nodes", 17);
  cfg.sign = detail::param<std::string>(p, "sign", "defocusing") == "focusing" ? 1 : -1;
  cfg.power = detail::param(p, "power", 3);
  cfg.max_iterations = detail::param(p, "iterations", 10);
  const double data_norm = detail::param(p, "data_norm", 0.01);
  std::mt19937_64 rng(ctx.seed());
  const auto [f1, f2] = nlw_data(g, data_norm, rng);
  const NlwReport rep = nlw_picard(f1, f2, cfg);
  NlwConfig fine = cfg;
  fine.time_nodes = 2 * cfg.time_nodes - 1;
  const NlwReport rep2 = nlw_picard(f1, f2, fine);
  const double change = std::abs(rep2.s_norm - rep.s_norm) / rep.s_norm;
  const double change_str = std::abs(rep2.strichartz_norm - rep.strichartz_norm) / rep.strichartz_norm;
  res.summary = rep;
  res.summary["data_norm"] = data_norm;
  res.summary["refined_s_norm"] = rep2.s_norm;
  res.summary["refinement_change"] = std::max(change, change_str);
  bool contract = !rep.contraction_factors.empty();
  for (double c : rep.contraction_factors) contract = contract && c < 1.0;
  res.verdicts["residual"] = rep.residual <= 1e-6 && rep.iterations <= 10;
  res.verdicts["contraction"] = contract && !rep.diverged;
  res.verdicts["energy_drift"] = rep.energy_drift <= 0.01;
  res.verdicts["time_refinement"] = std::max(change, change_str) <= 0.01;
  CsvTable t{{"t", "energy", "l6_norm"}, {}};
  for (std::size_t i = 0; i < rep.times.t.size(); ++i)
    t.add({rep.times.t[i], rep.energy[i], lp_norm(rep.solution[i], 6.0)});
  res.tables["nlw_series"] = t;
  return res;
}

inline ExperimentResult experiment_sharpness(const json& p, ExperimentContext& ctx) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const auto ks = detail::k_range(p, {3, 4, 5, 6, 7});
  const double pv = detail::param(p, "p", 6.0);
  const double s = detail::param(p, "s", 0.0);
  const double tol = detail::param(p, "tolerance", 0.1);
  const bool shift = detail::param(p, "s_shift", false);
  const auto spec = detail::family_spec(p, n, ks);
  for (int k : ks) ctx.check_grid(spec.grid.grid(k, n));
  const auto out = sharpness_experiment(spec, s, pv, ctx.frame(n), ctx.directions(n), tol);
  res.summary["focusing"] = out.focusing;
  res.summary["unit_scale"] = out.unit_scale;
  res.verdicts["focusing_slope"] = out.focusing.pass;
  res.verdicts["unit_scale_slope"] = out.unit_scale.pass;
  CsvTable t{{"k", "log2_focusing", "log2_unit_scale"}, {}};
  for (std::size_t i = 0; i < ks.size(); ++i)
    t.add({double(ks[i]), out.focusing.log2_values[i], out.unit_scale.log2_values[i]});
  res.tables["sharpness"] = t;
  if (shift) {
    const auto up = sharpness_experiment(spec, s + 1.0, pv, ctx.frame(n), ctx.directions(n), tol);
    const double df = up.focusing.slope - out.focusing.slope, du = up.unit_scale.slope - out.unit_scale.slope;
    res.summary["s_shift"] = {{"focusing", df}, {"unit_scale", du}};
    res.verdicts["s_shift"] = std::abs(df - 1.0) <= 0.05 && std::abs(du - 1.0) <= 0.05;
  }
  return res;
}

inline ExperimentResult experiment_curvature(const json& p, ExperimentContext&) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const PhaseFunction phase = make_phase(detail::param<std::string>(p, "phase", "half_wave"), n,
                                         p.contains("phase_params") ? p["phase_params"] : json::object());
  const auto samples = cone_samples(n, detail::param(p, "samples", 100), detail::param(p, "radius", 1.0));
  const auto rep = curvature_check(phase, samples, detail::param(p, "threshold", 1e-8));
  res.summary = rep;
  if (p.contains("expect_cinematic"))
    res.verdicts["cinematic_expected"] = rep.cinematic == p["expect_cinematic"].get<bool>();
  if (rep.cinematic) res.verdicts["min_singular_value"] = rep.min_retained_gauss >= detail::param(p, "min_singular_value", 1e-6);
  CsvTable t{{"sample", "eta1", "eta2", "rank_mixed", "rank_gauss", "min_retained"}, {}};
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    t.add({double(i), s.eta[0], s.eta[1], double(s.rank_mixed), double(s.rank_gauss), s.min_retained_gauss});
  }
  res.tables["curvature"] = t;
  return res;
}

inline ExperimentResult experiment_atoms(const json& p, ExperimentContext&) {
  ExperimentResult res;
  const int n = detail::param(p, "n", 2);
  const int N = detail::param(p, "N", 128);
  const double L = detail::param(p, "L", 4.0);
  const auto taus = detail::param(p, "taus", std::vector<double>{0.25, 0.5, 1.0});
  const double scale = detail::param(p, "violation_scale", 10.0);
  const PeriodicGrid g(n, N, L);
  CsvTable t{{"tau", "scaled", "outside_fraction", "weighted_norm", "budget", "pass"}, {}};
  bool canon = true, viol_norm = true, viol_support = true, deterministic = true;
  json reports = json::array();
  for (double tau : taus) {
    AtomDescriptor a;
    a.center = {0.5 * L, 0.5 * L, n == 3 ? 0.5 * L : 0.0};
    const double ang = 0.3;
    a.direction = {std::cos(ang), std::sin(ang), 0.0};
    a.tau = tau;
    const SampledField f = canonical_atom(g, a);
    const AtomReport r = atom_check(f, a);
    const AtomReport again = atom_check(canonical_atom(g, a), a);
    deterministic = deterministic && json(r).dump() == json(again).dump();
    SampledField big = f;
    big *= cplx(scale);
    const AtomReport rb = atom_check(big, a);
    canon = canon && r.pass;
    viol_norm = viol_norm && !rb.norm_pass;
    viol_support = viol_support && rb.support_pass;
    reports.push_back({{"tau", tau}, {"canonical", r}, {"scaled", rb}});
    t.add({tau, 0.0, r.outside_fraction, r.weighted_norm, r.budget, r.pass ? 1.0 : 0.0});
    t.add({tau, scale, rb.outside_fraction, rb.weighted_norm, rb.budget, rb.pass ? 1.0 : 0.0});
  }
  res.summary["atoms"] = reports;
  res.verdicts["canonical_pass"] = canon;
  res.verdicts["scaled_fail_norm"] = viol_norm;
  res.verdicts["scaled_pass_support"] = viol_support;
  res.verdicts["deterministic"] = deterministic;
  res.tables["atoms"] = t;
  return res;
}

// Orchestration ----------------------------------------------------------------------

inline std::string canonical_kind(const std::string& k) {
  if (k == "norm" || k == "norms") return "norms";
  if (k == "atom" || k == "atoms") return "atoms";
  static const std::vector<std::string> known{"decouple", "wolff", "wave", "nlw", "sharpness", "curvature"};
  if (std::find(known.begin(), known.end(), k) != known.end()) return k;
  throw DomainError("unknown experiment '" + k + "'");
}

inline ExperimentResult run_one(const std::string& kind, const json& params, ExperimentContext& ctx) {
  const std::string k = canonical_kind(kind);
  if (k == "norms") return experiment_norms(params, ctx);
  if (k == "decouple") return experiment_decouple(params, ctx);
  if (k == "wolff") return experiment_wolff(params, ctx);
  if (k == "wave") return experiment_wave(params, ctx);
  if (k == "nlw") return experiment_nlw(params, ctx);
  if (k == "sharpness") return experiment_sharpness(params, ctx);
  if (k == "curvature") return experiment_curvature(params, ctx);
  return experiment_atoms(params, ctx);
}

struct RunSummary {
  json summary;
  bool pass = true;
};

/// Validates the config; when `only_kind` is set every entry must be of that kind
/// (entries without "kind" inherit it).
inline json validate_config(const json& cfg, const std::string& only_kind = "") {
  if (!cfg.is_object()) throw DomainError("config: top level must be an object");
  if (cfg.value("schema_version", -1) != kSchemaVersion)
    throw DomainError("config: schema_version must be " + std::to_string(kSchemaVersion));
  json out = cfg;
  if (!out.contains("experiments")) out["experiments"] = json::array();
  if (!out["experiments"].is_array()) throw DomainError("config: 'experiments' must be an array");
  const std::string want = only_kind.empty() ? "" : canonical_kind(only_kind);
  std::size_t idx = 0;
  for (auto& e : out["experiments"]) {
    if (!e.is_object()) throw DomainError("config: every experiment must be an object");
    if (!e.contains("kind")) {
      if (want.empty()) throw DomainError("config: experiment without 'kind'");
      e["kind"] = want;
    }
    e["kind"] = canonical_kind(e["kind"].get<std::string>());
    if (!want.empty() && e["kind"] != want)
      throw DomainError("config: experiment of kind '" + e["kind"].get<std::string>() + "' given to '" + want + "'");
    if (!e.contains("name")) e["name"] = e["kind"].get<std::string>() + "_" + std::to_string(idx);
    if (!e.contains("params")) e["params"] = json::object();
    if (!e["params"].is_object()) throw DomainError("config: 'params' must be an object");
    ++idx;
  }
  return out;
}

/// Runs every experiment of a validated config and writes summary.json plus
/// one CSV per table into `out_dir`.
inline RunSummary run_config(const json& raw, const fs::path& out_dir, const std::string& only_kind = "") {
  const json cfg = validate_config(raw, only_kind);
  ExperimentContext ctx(cfg.value("seed", std::uint64_t{12345}), cfg.value("directions", 256));
  fs::create_directories(out_dir);
  RunSummary rs;
  rs.summary = {{"schema_version", kSchemaVersion}, {"seed", ctx.seed()}, {"experiments", json::array()}};
  for (const auto& e : cfg["experiments"]) {
    ExperimentResult r = run_one(e["kind"].get<std::string>(), e["params"], ctx);
    r.name = e["name"].get<std::string>();
    r.kind = e["kind"].get<std::string>();
    for (const auto& [tname, table] : r.tables) table.write(out_dir / (r.name + "_" + tname + ".csv"));
    rs.summary["experiments"].push_back(
        {{"name", r.name}, {"kind", r.kind}, {"pass", r.pass()}, {"verdicts", r.verdicts}, {"summary", r.summary}});
    rs.pass = rs.pass && r.pass();
  }
  rs.summary["pass"] = rs.pass;
  write_json(out_dir / "summary.json", rs.summary);
  return rs;
}

inline RunSummary run_experiment(const fs::path& config_path, const fs::path& out_dir, const std::string& only_kind = "") {
  return run_config(read_json(config_path), out_dir, only_kind);
}

}  // namespace hfio
