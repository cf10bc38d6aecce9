#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "hfio/errors.hpp"
#include "hfio/spectral.hpp"

namespace hfio {

/// Gauss-Legendre rule on [-1, 1]; nodes ascending.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) : nodes(order), weights(order) {
    require(order >= 1, "GaussLegendre: order must be positive");
    for (int i = 0; i < (order + 1) / 2; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[order - 1 - i] = x;
      weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
template <class F>
double integrate_composite(F&& f, double a, double b, int panels, const GaussLegendre& rule) {
  if (b <= a) return 0.0;
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) part += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    acc += 0.5 * h * part;
  }
  return acc;
}

template <class F>
double integrate_composite(F&& f, double a, double b, int panels, int order = 8) {
  return integrate_composite(std::forward<F>(f), a, b, panels, GaussLegendre(order));
}

/// Trapezoid weights for a sorted node list on [t_0, t_last].
inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

/// Least-squares fit y = a + b x; returns slope, intercept and RMS residual.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need at least two matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-14) throw DomainError("least_squares: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace hfio
