// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hfio/decoupling.hpp"
#include "hfio/experiments.hpp"
#include "hfio/families.hpp"
#include "hfio/torus.hpp"

using namespace hfio;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const WavePacketFrame& frame2() {
  static const WavePacketFrame f(FrameConfig{});
  return f;
}

const DirectionSet& dirs2() {
  static const DirectionSet d = DirectionSet::circle(256);
  return d;
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

std::string failed(const ExperimentResult& r) {
  std::string s;
  for (const auto& [k, v] : r.verdicts)
    if (!v) s += " " + k;
  return s.empty() ? "" : " failed:" + s;
}

Outcome partitions() {
  const auto& Psi = frame2().annulus();
  double worst_psi = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double r = std::exp2(8.0 * i / 99.0);
    const double v = simpson([&](double t) { const double x = Psi(std::exp(t) * r); return x * x; },
                             std::log(0.5 / r), std::log(2.0 / r), 20000);
    worst_psi = std::max(worst_psi, std::abs(v - 1.0));
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(0.5, 2.0), ang(0.0, kTwoPi);
  double worst_chi = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const auto caps = build_caps(k, 2);
    for (int t = 0; t < 500; ++t) {
      const double r = std::ldexp(1.0, k) * uni(rng), a = ang(rng);
      const Vec eta{r * std::cos(a), r * std::sin(a), 0.0};
      double s = 0.0;
      for (std::size_t nu = 0; nu < caps.size(); ++nu) s += caps.chi(nu, eta);
      worst_chi = std::max(worst_chi, std::abs(s - 1.0));
    }
  }
  double worst_tor = 0.0;
  for (int step : {16, 32}) {
    AtlasConfig cfg;
    cfg.step_points = step;
    const TorusAtlas atlas(PeriodicGrid(2, 256, kTwoPi), cfg);
    for (double s : atlas.partition_squares()) worst_tor = std::max(worst_tor, std::abs(s - 1.0));
  }
  return {worst_psi <= 1e-8 && worst_chi <= 1e-10 && worst_tor <= 1e-10,
          "Psi " + fmt("%.1e", worst_psi) + ", chi " + fmt("%.1e", worst_chi) + ", torus " + fmt("%.1e", worst_tor)};
}

Outcome reproducing() {
  const auto& fr = frame2();
  const PeriodicGrid g(2, 256, kTwoPi);
  const auto mc = reproducing_multiplier_continuous(fr);
  std::vector<double> sym(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec xi = g.frequency(i);
    const double r = norm(xi);
    sym[i] = (r < 0.9 || r > 33.0) ? 0.0 : mc(xi).real() * fr.direction_sum(xi, dirs2());
  }
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_band_field(g, 1.0, 32.0, rng);
    Spectrum s = forward(f);
    for (std::size_t i = 0; i < g.size(); ++i) s.coeffs[i] *= sym[i];
    worst = std::max(worst, lp_norm(inverse(std::move(s)) - f, 2.0) / lp_norm(f, 2.0));
  }
  return {worst <= 1e-3, "max relative error " + fmt("%.2e", worst) + " over 20 fields"};
}

Outcome l2_equivalence() {
  ExperimentContext ctx(11, 256);
  const auto r = run_one("norms",
                         json{{"n", 2}, {"ks", {3, 4, 5, 6, 7}}, {"fields_per_k", 10}, {"ps", {2}}, {"torus", true},
                              {"torus_fields_per_k", 10}},
                         ctx);
  const double a = r.summary["spread"][std::to_string(2.0)].get<double>(), b = r.summary["torus_spread"].get<double>();
  return {r.pass(), "spread R^2 " + fmt("%.4f", a) + ", T^2 " + fmt("%.4f", b) + failed(r)};
}

Outcome cap_counts() {
  std::string d;
  bool ok = true;
  for (int k = 0; k <= 10; ++k) {
    const double delta = std::pow(2.0, -0.5 * k);
    int oracle = 0;
    for (int N = 1; N < 100000; ++N)
      if (2.0 * std::sin(kPi / N) >= delta - 1e-12) oracle = N;
    const int got = static_cast<int>(build_caps(k, 2).size());
    ok = ok && got == oracle;
    d += (k ? "," : "") + std::to_string(got);
  }
  return {ok, "counts k=0..10: " + d};
}

Outcome discrete_norms() {
  PacketFamilySpec spec;
  std::vector<double> all;
  std::string d;
  for (double p : {4.0, 6.0}) {
    const double s = exponents(2, Rational(static_cast<std::int64_t>(p))).s.value();
    std::vector<double> v;
    for (int k = 3; k <= 7; ++k) {
      const auto caps = build_caps(k, 2);
      const auto f = make_family(spec, k, caps);
      v.push_back(discrete_annulus_norm(f, k, p, caps) / hfio_norm(f, -s, p, frame2(), dirs2()));
    }
    all.insert(all.end(), v.begin(), v.end());
    d += "p=" + fmt("%g", p) + " spread " + fmt("%.3f", spread(v)) + "; ";
  }
  return {spread(all) <= 4.0, d + "joint " + fmt("%.3f", spread(all))};
}

Outcome sharpness() {
  ExperimentContext ctx(7, 256);
  const auto r = run_one("sharpness", json{{"n", 2}, {"p", 6}, {"s", 0}, {"ks", {3, 4, 5, 6, 7}}}, ctx);
  const auto& f = r.summary["focusing"];
  const auto& u = r.summary["unit_scale"];
  return {r.pass(), "focusing slope " + fmt("%.3f", f["slope"].get<double>()) + " (res " +
                        fmt("%.3f", f["residual"].get<double>()) + "), unit-scale " +
                        fmt("%.3f", u["slope"].get<double>()) + " (res " + fmt("%.3f", u["residual"].get<double>()) + ")" +
                        failed(r)};
}

Outcome wolff() {
  ExperimentContext ctx(3, 256);
  const auto r = run_one("wolff",
                         json{{"n", 2}, {"p", "6"}, {"eps", 0.1}, {"ks", {3, 4, 5, 6, 7}}, {"phase", "half_wave"},
                              {"times", {{"kind", "clustered"}, {"t0", -1}, {"t1", 1}, {"nodes", 33}, {"alpha", 5}}}},
                         ctx);
  return {r.pass(), "dec slope " + fmt("%.3f", r.summary["dec_ratio_slope"].get<double>()) + " (<= 0.367), fio slope " +
                        fmt("%.3f", r.summary["hfio_ratio_slope"].get<double>()) + " (<= 0.1)" + failed(r)};
}

Outcome propagator() {
  ExperimentContext ctx(5, 256);
  const auto r = run_one("wave", json{{"n", 2}, {"ks", {3, 4, 5, 6, 7}}, {"ts", {0.1, 0.5, 1.0}}, {"ps", {4, 6}}}, ctx);
  return {r.pass(), "FIO ratio spread " + fmt("%.4f", r.summary["fio_ratio_spread"].get<double>()) + ", L^p slope at t=1 " +
                        fmt("%.3f", r.summary["lp_slope_at_largest_t"].get<double>()) + failed(r)};
}

Outcome curvature() {
  const auto samples = cone_samples(2, 100, 1.0);
  const auto flat = curvature_check(make_phase("flat", 2), samples, 1e-8);
  const auto cone = curvature_check(make_phase("half_wave", 2), samples, 1e-8);
  bool ok = !flat.cinematic && cone.cinematic && cone.min_retained_gauss >= 1e-6;
  for (const auto& s : flat.samples) ok = ok && s.rank_mixed == 2 && s.rank_gauss == 0;
  for (const auto& s : cone.samples) ok = ok && s.rank_mixed == 2 && s.rank_gauss == 1;
  return {ok, "flat cinematic " + std::string(flat.cinematic ? "true" : "false") + ", half-wave cinematic " +
                  (cone.cinematic ? "true" : "false") + ", min retained " + fmt("%.3e", cone.min_retained_gauss)};
}

Outcome nlw() {
  ExperimentContext ctx(9, 256);
  const auto r = run_one("nlw", json{{"N", 64}, {"t0", 0.5}, {"nodes", 17}, {"sign", "defocusing"}, {"data_norm", 0.01}}, ctx);
  return {r.pass(), "residual " + fmt("%.1e", r.summary["residual"].get<double>()) + " after " +
                        std::to_string(r.summary["iterations"].get<int>()) + " iterations, energy drift " +
                        fmt("%.1e", r.summary["energy_drift"].get<double>()) + ", dt-halving change " +
                        fmt("%.1e", r.summary["refinement_change"].get<double>()) + failed(r)};
}

Outcome atlas() {
  std::mt19937_64 rng(17);
  const PeriodicGrid g(2, 256, kTwoPi);
  SampledField u = random_band_field(g, 0.0, 100.0, rng);
  double pq = 0.0;
  AtlasConfig a8, a16;
  a8.step_points = 256 / 8;
  a16.step_points = 256 / 16;
  for (const auto& cfg : {a8, a16}) {
    const TorusAtlas A(g, cfg);
    const auto back = p_assemble(q_restrict(u, A), A);
    for (std::size_t i = 0; i < g.size(); ++i) pq = std::max(pq, std::abs(back.values[i] - u.values[i]));
  }
  const PeriodicGrid h(2, 128, kTwoPi);
  AtlasConfig b8, b16;
  b8.step_points = 128 / 8;
  b16.step_points = 128 / 16;
  const TorusAtlas A(h, b8), B(h, b16);
  std::vector<double> ratios;
  for (int k : {3, 4}) {
    for (int i = 0; i < 2; ++i) {
      const auto f = random_annulus_field(h, k, rng);
      for (double p : {2.0, 4.0, 6.0})
        ratios.push_back(hfio_norm_torus(f, 0.0, p, A, frame2(), dirs2()) / hfio_norm_torus(f, 0.0, p, B, frame2(), dirs2()));
    }
  }
  return {pq <= 1e-10 && spread(ratios) <= 4.0,
          "PQ error " + fmt("%.1e", pq) + ", two-atlas ratio spread " + fmt("%.3f", spread(ratios))};
}

Outcome atoms() {
  ExperimentContext ctx(1, 256);
  const auto r = run_one("atoms", json{{"n", 2}, {"N", 128}, {"L", 4.0}, {"taus", {0.25, 0.5, 1.0}}}, ctx);
  return {r.pass(), std::to_string(r.verdicts.size()) + " verdicts" + failed(r)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"partition normalizations", partitions},
      {"reproducing formula", reproducing},
      {"L2 equivalence", l2_equivalence},
      {"cap counts", cap_counts},
      {"discrete/continuous norm equivalence", discrete_norms},
      {"sharpness slopes", sharpness},
      {"wolff-type consistency", wolff},
      {"propagator invariance", propagator},
      {"curvature checker", curvature},
      {"cubic NLW", nlw},
      {"PQ = id and atlas independence", atlas},
      {"atom validation", atoms},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
