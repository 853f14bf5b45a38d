#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "innerdyn/errors.hpp"

namespace innerdyn {

// Truncated Taylor series at 0. Coefficients live in c(0..M); all operations
// are exact recurrences on the coefficients, so results are reproducible to
// roundoff and independent of any sampling radius. Sampling appears only in
// from_samples, the cross-check oracle.

template <typename Scalar>
struct PowerSeries {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c;

  PowerSeries() = default;
  explicit PowerSeries(int order) : c(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(order + 1)) {}

  int order() const { return static_cast<int>(c.size()) - 1; }
  Scalar operator()(int n) const { return c(n); }
  Scalar& operator()(int n) { return c(n); }
};

template <typename Scalar>
PowerSeries<Scalar> series_mul(const PowerSeries<Scalar>& a, const PowerSeries<Scalar>& b) {
  if (a.order() != b.order())
    throw precondition_error("series_mul: operands truncated at different orders (" +
                             std::to_string(a.order()) + " vs " + std::to_string(b.order()) + ")");
  const int M = a.order();
  PowerSeries<Scalar> out(M);
  for (int n = 0; n <= M; ++n) {
    Scalar s{};
    for (int k = 0; k <= n; ++k) s += a.c(k) * b.c(n - k);
    out.c(n) = s;
  }
  return out;
}

// exp(g) by the differential recurrence n*s_n = sum_{k=1..n} k g_k s_{n-k}.
template <typename Scalar>
PowerSeries<Scalar> series_exp(const PowerSeries<Scalar>& g) {
  const int M = g.order();
  PowerSeries<Scalar> s(M);
  using std::exp;
  s.c(0) = exp(g.c(0));
  for (int n = 1; n <= M; ++n) {
    Scalar acc{};
    for (int k = 1; k <= n; ++k) acc += static_cast<double>(k) * g.c(k) * s.c(n - k);
    s.c(n) = acc / static_cast<double>(n);
  }
  return s;
}

// f o g with g(0) = 0, by Horner over truncated series.
template <typename Scalar>
PowerSeries<Scalar> series_compose(const PowerSeries<Scalar>& f, const PowerSeries<Scalar>& g) {
  if (f.order() != g.order())
    throw precondition_error("series_compose: operands truncated at different orders (" +
                             std::to_string(f.order()) + " vs " + std::to_string(g.order()) + ")");
  using std::abs;
  if (abs(g.c(0)) != 0.0)
    throw domain_error("series_compose: inner series must have zero constant term");
  const int M = f.order();
  PowerSeries<Scalar> acc(M);
  acc.c(0) = f.c(M);
  for (int k = M - 1; k >= 0; --k) {
    acc = series_mul(acc, g);
    acc.c(0) += f.c(k);
  }
  return acc;
}

struct SampledSeries {
  PowerSeries<std::complex<double>> series;
  bool conditioning_warning = false;
  double rescale_factor = 1.0;
};

// Trapezoid Cauchy integral on |z| = r with N = 4M points:
// c_n = (1/N) sum_k eval(r e^{2 pi i k/N}) e^{-2 pi i k n/N} / r^n.
inline SampledSeries series_from_samples(const std::function<std::complex<double>(std::complex<double>)>& eval,
                                         int M, double r) {
  if (!(r > 0.0 && r < 1.0)) throw domain_error("series_from_samples: radius must lie in (0,1)");
  const int N = 4 * M;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXcd samples(N);
  for (int k = 0; k < N; ++k) {
    double ang = two_pi * k / N;
    samples(k) = eval(std::complex<double>(r * std::cos(ang), r * std::sin(ang)));
  }
  SampledSeries out;
  out.series = PowerSeries<std::complex<double>>(M);
  out.rescale_factor = std::pow(r, -M);
  out.conditioning_warning = out.rescale_factor > 1e12;
  double rn = 1.0;
  for (int n = 0; n <= M; ++n) {
    std::complex<double> s{};
    for (int k = 0; k < N; ++k) {
      double ang = -two_pi * static_cast<double>(k) * n / N;
      s += samples(k) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out.series.c(n) = s / (static_cast<double>(N) * rn);
    rn *= r;
  }
  return out;
}

}
