#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hfio/families.hpp"
#include "hfio/fio_ops.hpp"

using namespace hfio;

namespace {

SampledField random_mean_zero(const PeriodicGrid& g, double r_lo, double r_hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_band_field(g, r_lo, r_hi, rng);
}

double rel_l2(const SampledField& a, const SampledField& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

}  // namespace

TEST_CASE("at t = 0 the half-wave operator is (2 pi)^n times the identity") {
  const PeriodicGrid g(2, 32, 5.0);
  const auto f = random_mean_zero(g, 1.0, 12.0, 1);
  const StandardFormFIO T{half_wave_phase(2), SymbolFunction::unit(), g, TimeSamples{{0.0}, {1.0}}};
  for (auto path : {FioPath::multiplier, FioPath::direct}) {
    const auto u = apply_fio(T, f, path);
    CHECK(rel_l2(u.at(0), std::pow(kTwoPi, 2) * f) < 1e-12);
  }
}

TEST_CASE("a single lattice mode") {
  const PeriodicGrid g(2, 16, kTwoPi);
  const Mode m0{3, -2, 0};
  const std::size_t idx = g.flat_index({m0[0], m0[1], 0});
  Spectrum s(g);
  const cplx c0{0.7, -0.2};
  s.coeffs[idx] = c0;
  const auto f = inverse(s);
  const Vec xi0 = g.frequency(idx);
  const auto phase = cubic_perturbed_phase(2, 0.1);
  auto sym = SymbolFunction::cutoff({kPi, kPi, 0.0}, 1.0, 2.5);
  sym.frequency = [](const Vec& eta) { return 1.0 / (1.0 + norm(eta)); };
  const TimeSamples ts{{-0.3, 0.4}, {0.5, 0.5}};
  const StandardFormFIO T{phase, sym, g, ts};
  const auto u = apply_fio(T, f, FioPath::direct);
  double err = 0.0;
  for (std::size_t ti = 0; ti < ts.t.size(); ++ti)
    for (std::size_t z = 0; z < g.size(); ++z) {
      const Vec x = g.position(z);
      // f^ at xi0 times the lattice cell (2 pi / L)^n is L^n c0 (2 pi / L)^n
      const cplx expect = std::polar(1.0, phase(x, ts.t[ti], xi0)) * sym(g, x, xi0) * c0 * std::pow(kTwoPi, 2);
      err = std::max(err, std::abs(u.slices[ti][z] - expect));
    }
  CHECK(err < 1e-12);
  const auto um = apply_fio(T, f, FioPath::multiplier);
  double diff = 0.0;
  for (std::size_t ti = 0; ti < ts.t.size(); ++ti)
    for (std::size_t z = 0; z < g.size(); ++z) diff = std::max(diff, std::abs(u.slices[ti][z] - um.slices[ti][z]));
  CHECK(diff < 1e-12);
}

TEST_CASE("multiplier and direct paths agree with the propagator") {
  const PeriodicGrid g(2, 32, kTwoPi);
  const auto f = random_mean_zero(g, 1.0, 10.0, 2);
  const TimeSamples ts = TimeSamples::uniform(-0.5, 0.7, 4);
  const StandardFormFIO T{half_wave_phase(2), SymbolFunction::unit(), g, ts};
  const auto a = apply_fio(T, f, FioPath::multiplier), b = apply_fio(T, f, FioPath::direct);
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    const auto ref = std::pow(kTwoPi, 2) * half_wave_propagator(f, ts.t[i]);
    CHECK(rel_l2(a.at(i), ref) <= 1e-8);
    CHECK(rel_l2(b.at(i), ref) <= 1e-8);
  }
}

TEST_CASE("operator input checks") {
  const PeriodicGrid g(2, 16, kTwoPi);
  SampledField c(g);
  for (auto& v : c.values) v = 1.0;
  const StandardFormFIO T{half_wave_phase(2), SymbolFunction::unit(), g, TimeSamples{{0.0}, {1.0}}};
  CHECK_THROWS_AS(apply_fio(T, c), SupportError);
  const StandardFormFIO U{half_wave_phase(2), SymbolFunction::unit(), PeriodicGrid(2, 32, kTwoPi), T.times};
  CHECK_THROWS_AS(apply_fio(U, random_mean_zero(g, 1.0, 4.0, 3)), GridMismatch);
  PhaseFunction generic("generic", 2, [](const Vec& x, double t, const Vec& eta) { return dot(x, eta) + t * norm(eta); });
  const StandardFormFIO V{generic, SymbolFunction::unit(), g, T.times};
  CHECK_THROWS_AS(apply_fio(V, random_mean_zero(g, 1.0, 4.0, 3), FioPath::multiplier), DomainError);
}

TEST_CASE("half-wave propagator") {
  const PeriodicGrid g(2, 64, 3.0);
  const auto f = random_mean_zero(g, 0.0, 30.0, 4);
  CHECK(rel_l2(half_wave_propagator(f, 0.0), f) < 1e-14);
  const auto ab = half_wave_propagator(half_wave_propagator(f, 0.3), -1.1);
  CHECK(rel_l2(ab, half_wave_propagator(f, -0.8)) < 1e-12);
  for (double t : {0.1, 1.0, 17.0})
    CHECK(lp_norm(half_wave_propagator(f, t), 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
}

TEST_CASE("linear wave solutions") {
  const PeriodicGrid g(2, 64, kTwoPi);
  const auto u0 = random_mean_zero(g, 0.0, 12.0, 5);
  const auto u1 = random_mean_zero(g, 1.0, 12.0, 6);
  CHECK(rel_l2(wave_solution(u0, u1, 0.0), u0) < 1e-14);

  SampledField c(g), z(g);
  for (auto& v : c.values) v = {2.0, 1.0};
  for (double t : {0.5, 3.0}) CHECK(rel_l2(wave_solution(c, z, t), c) < 1e-14);

  const double e0 = wave_energy(u0, u1);
  for (double t : {0.2, 1.3, 9.0}) {
    const double e = wave_energy(wave_solution(u0, u1, t), wave_velocity(u0, u1, t));
    CHECK(std::abs(e - e0) / e0 <= 1e-10);
  }
  // d/dt by central differences
  const double t = 0.4, h = 1e-4;
  const auto fd = (1.0 / (2.0 * h)) * (wave_solution(u0, u1, t + h) - wave_solution(u0, u1, t - h));
  CHECK(rel_l2(fd, wave_velocity(u0, u1, t)) < 1e-6);
}

TEST_CASE("homogeneity of the phase library") {
  std::vector<std::pair<Vec, double>> zs{{{0.1, -0.2, 0.0}, 0.3}, {{1.0, 2.0, 0.0}, -0.7}};
  std::vector<Vec> etas{{1.0, 0.5, 0.0}, {-3.0, 0.2, 0.0}};
  for (const char* name : {"flat", "half_wave", "anisotropic", "cubic_perturbed"})
    CHECK(homogeneity_defect(make_phase(name, 2), zs, etas) < 1e-13);
  CHECK_THROWS_AS(make_phase("nope", 2), DomainError);
}

TEST_CASE("curvature ranks") {
  const auto pts = cone_samples(2, 100);
  const auto flat = curvature_check(flat_phase(2), pts);
  CHECK_FALSE(flat.cinematic);
  for (const auto& s : flat.samples) {
    CHECK(s.rank_mixed == 2);
    CHECK(s.rank_gauss == 0);
  }

  const auto cone = curvature_check(half_wave_phase(2), pts);
  CHECK(cone.cinematic);
  CHECK(cone.min_retained_gauss >= 1e-6);
  for (const auto& s : cone.samples) {
    CHECK(s.rank_mixed == 2);
    CHECK(s.rank_gauss == 1);
  }

  // symbolic Hessian (I - eta^ eta^T) / |eta| times G_t; here G = (-eta^, 1) up to sign
  const auto one = curvature_check(half_wave_phase(2), cone_samples(2, 3, 4.0));
  for (const auto& s : one.samples) {
    CHECK(s.gauss_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(s.sv_gauss[0] == doctest::Approx(0.25).epsilon(1e-8));
  }

  // finite-difference Hessian on the cubic perturbation
  const auto cubic = curvature_check(cubic_perturbed_phase(2, 0.1), pts);
  CHECK(cubic.cinematic);
  CHECK(cubic.min_retained_gauss > 1e-6);
  MESSAGE("cubic-perturbed min retained singular value " << cubic.min_retained_gauss);

  // the same phase without registered h goes through the generic path
  PhaseFunction generic("generic_cone", 2, [](const Vec& x, double t, const Vec& eta) { return dot(x, eta) + t * norm(eta); });
  const auto gen = curvature_check(generic, cone_samples(2, 20));
  CHECK(gen.cinematic);

  const auto cone3 = curvature_check(half_wave_phase(3), cone_samples(3, 50));
  CHECK(cone3.cinematic);
  for (const auto& s : cone3.samples) CHECK(s.rank_gauss == 2);
}

TEST_CASE("flow diagnostic") {
  const PeriodicGrid g(2, 32, kTwoPi);
  const Vec nu{1.0, 0.0, 0.0};
  const StandardFormFIO T{half_wave_phase(2), SymbolFunction::unit(), g, TimeSamples{{0.0}, {1.0}}};

  // one mode: closed form (2 pi)^n |c| |e^{i t (|xi0| - nu.xi0)} - 1|
  const std::size_t idx = g.flat_index({5, 2, 0});
  Spectrum s(g);
  const cplx c0{0.3, 0.4};
  s.coeffs[idx] = c0;
  const auto h = inverse(s);
  const Vec xi0 = g.frequency(idx);
  std::vector<std::pair<Vec, double>> zs{{{0.0, 0.0, 0.0}, 0.0}, {{0.01, -0.02, 0.0}, 0.015}, {{-0.03, 0.0, 0.0}, -0.02}};
  const auto rep = flow_diagnostic(T, h, nu, zs);
  CHECK(rep.points[0].discrepancy == 0.0);
  for (const auto& p : rep.points) {
    const double oracle = std::pow(kTwoPi, 2) * std::abs(c0) * std::abs(std::polar(1.0, p.t * (norm(xi0) - dot(nu, xi0))) - 1.0);
    CHECK(std::abs(p.discrepancy - oracle) <= 1e-10);
  }
  CHECK(rep.l1_hat == doctest::Approx(std::pow(kTwoPi, 2) * std::abs(c0)).epsilon(1e-12));

  // focusing packets: the normalized discrepancy stays put across levels
  PacketFamilySpec spec;
  std::vector<double> ratios;
  for (int k = 4; k <= 7; ++k) {
    const auto f = make_family(spec, k);
    const StandardFormFIO Tk{half_wave_phase(2), SymbolFunction::unit(), f.grid, T.times};
    std::vector<std::pair<Vec, double>> pts;
    for (int i = 1; i <= 6; ++i) {
      const double r = std::ldexp(1.0, -5) * i / 6.0;
      pts.push_back({{r * std::cos(1.1 * i), r * std::sin(1.1 * i), 0.0}, 0.5 * r * std::cos(0.7 * i)});
    }
    const auto rk = flow_diagnostic(Tk, f, nu, pts, kPi / 4.0);
    CHECK(std::isfinite(rk.max_ratio));
    ratios.push_back(rk.max_ratio);
  }
  const double drift = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
  MESSAGE("flow ratios k=4..7 drift " << drift);
  CHECK(drift <= 2.0);

  // support violations
  Spectrum bad(g);
  bad.coeffs[g.flat_index({-4, 0, 0})] = 1.0;
  CHECK_THROWS_AS(flow_diagnostic(T, inverse(bad), nu, zs), SupportError);
}

TEST_CASE("time samples") {
  const auto u = TimeSamples::uniform(-1.0, 2.0, 7);
  double w = 0.0;
  for (double x : u.w) w += x;
  CHECK(w == doctest::Approx(3.0).epsilon(1e-14));
  const auto c = TimeSamples::clustered(0.0, 1.0, 33, 5.0);
  double wc = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    wc += c.w[i];
    m2 += c.w[i] * c.t[i] * c.t[i];
  }
  CHECK(c.t.front() > -1.0);
  CHECK(c.t.back() < 1.0);
  CHECK(wc == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(m2 == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(std::abs(c.t[16]) < 1e-15);
  CHECK(c.t[17] - c.t[16] < 0.01);
}
