#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hfio/families.hpp"
#include "hfio/wavepacket.hpp"

using namespace hfio;

namespace {

const WavePacketFrame& frame2() {
  static const WavePacketFrame f(FrameConfig{});
  return f;
}

// composite Simpson on [a, b] with n (even) intervals
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("annulus profile normalization") {
  const auto& Psi = frame2().annulus();
  for (double r : {1.0, 3.0, 17.5, 256.0}) {
    const double v = simpson([&](double t) { const double x = Psi(std::exp(t) * r); return x * x; },
                             std::log(0.5 / r), std::log(2.0 / r), 20000);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
  }
  // normalizing an already normalized profile changes nothing
  const auto again = build_annulus_profile([&](double r) { return Psi(r); });
  CHECK(again.scale() == doctest::Approx(1.0).epsilon(1e-10));

  // 10^5-node oracle for the reference seed
  const double mass = simpson([](double t) { const double x = reference_annulus_seed(std::exp(t)); return x * x; },
                              std::log(0.5), std::log(2.0), 100000);
  CHECK(Psi.scale() == doctest::Approx(1.0 / std::sqrt(mass)).epsilon(1e-8));
}

TEST_CASE("c_sigma") {
  const auto& fr = frame2();
  // phi == 1 on the whole circle once sqrt(sigma) r0 >= 2
  CHECK(fr.c_sigma(16.0) == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-12));
  CHECK(fr.c_sigma_direct(20.0) == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-12));

  double prev = 1e300;
  for (double s = 0.1; s <= 16.0; s *= 1.3) {
    const double c = fr.c_sigma(s);
    CHECK(c <= prev * (1.0 + 1e-12));
    prev = c;
  }

  // dense circle quadrature at sigma = 1/4
  const double sigma = 0.25;
  const int M = 1000000;
  double acc = 0.0;
  for (int i = 0; i < M; ++i) {
    const double th = kTwoPi * (i + 0.5) / M;
    const double v = fr.bump()(2.0 * std::sin(0.5 * th) / std::sqrt(sigma));
    acc += v * v;
  }
  acc *= kTwoPi / M;
  CHECK(fr.c_sigma(sigma) == doctest::Approx(1.0 / std::sqrt(acc)).epsilon(1e-8));
  CHECK(fr.c_sigma_direct(sigma) == doctest::Approx(1.0 / std::sqrt(acc)).epsilon(1e-8));
}

TEST_CASE("packet support and value") {
  const auto& fr = frame2();
  const Vec e1{1.0, 0.0, 0.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double r = 0.125 * uni(rng);
    const double th = kTwoPi * uni(rng);
    CHECK(fr.packet(e1, {r * std::cos(th), r * std::sin(th), 0.0}) == 0.0);
  }
  for (int i = 0; i < 200; ++i) {
    const double r = 0.2 + 100.0 * uni(rng);
    const double reach = 2.0 / std::sqrt(r);
    if (reach >= 2.0) continue;
    const double th0 = 2.0 * std::asin(0.5 * reach);
    const double th = th0 + (kPi - th0) * uni(rng) + 1e-9;
    CHECK(fr.packet(e1, {r * std::cos(th), r * std::sin(th), 0.0}) == 0.0);
  }

  // xi = 4 e1, omega = e1: the bump factor is 1 and sigma runs over [1/8, 1/2]
  const auto& Psi = fr.annulus();
  const double oracle = simpson([&](double t) { const double s = std::exp(t); return Psi(4.0 * s) * fr.c_sigma_direct(s); },
                                std::log(0.125), std::log(0.5), 100000);
  CHECK(fr.packet(e1, {4.0, 0.0, 0.0}) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("fast packet table tracks the quadrature") {
  const auto& fr = frame2();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double r = std::exp(std::log(0.2) + (std::log(1000.0) - std::log(0.2)) * uni(rng));
    const double d = WavePacketFrame::angular_reach(r) * uni(rng);
    const double scale = std::pow(r, 0.25);
    worst = std::max(worst, std::abs(fr.packet_fast(r, d) - fr.packet_exact(r, d)) / scale);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("reproducing multiplier") {
  const auto& fr = frame2();
  const auto dirs = DirectionSet::circle(256);
  const auto m = reproducing_multiplier(fr, dirs);
  // radial up to the direction quadrature, which converges spectrally in the count
  auto anisotropy = [&](const FourierMultiplier& mm, double r) {
    const double base = mm({r, 0.0, 0.0}).real();
    double worst = 0.0;
    for (double th = 0.0; th < kTwoPi; th += 0.37)
      worst = std::max(worst, std::abs(mm({r * std::cos(th), r * std::sin(th), 0.0}).real() - base) / base);
    return worst;
  };
  const auto fine = reproducing_multiplier(fr, DirectionSet::circle(2048));
  for (double r : {1.0, 7.3, 40.0, 250.0}) {
    CHECK(anisotropy(fine, r) <= 1e-6);
    CHECK(anisotropy(fine, r) <= anisotropy(m, r) + 1e-12);
  }
  // m |xi|^{-(n-1)/4} stays in a fixed band
  double lo = 1e300, hi = 0.0;
  for (double r = 1.0; r <= 256.0; r *= 1.25) {
    const double v = m({r, 0.0, 0.0}).real() * std::pow(r, -0.25);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 2.0);

  // f - sum_i w_i m(D) phi_i(D) f on a band 1 <= |xi| <= 32
  const PeriodicGrid g(2, 128, kTwoPi);
  const auto mc = reproducing_multiplier_continuous(fr);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const auto f = random_band_field(g, 1.0, 32.0, rng);
    Spectrum s = forward(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec xi = g.frequency(i);
      s.coeffs[i] *= mc(xi) * fr.direction_sum(xi, dirs);
    }
    const auto back = inverse(std::move(s));
    CHECK(lp_norm(back - f, 2.0) / lp_norm(f, 2.0) <= 1e-3);
  }
}

TEST_CASE("direction sets") {
  const auto c = DirectionSet::circle(64);
  CHECK(c.total_weight() == doctest::Approx(kTwoPi).epsilon(1e-14));
  const auto s = DirectionSet::fibonacci_sphere(200);
  CHECK(s.total_weight() == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  for (const auto& v : s.nodes) CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-14));
}
