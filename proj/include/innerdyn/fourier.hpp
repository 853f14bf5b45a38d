#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "innerdyn/errors.hpp"

namespace innerdyn {

// Two-sided Fourier coefficient vector, indices n in [-M, M].
struct FourierVector {
  Eigen::VectorXcd c;
  int M = 0;

  FourierVector() = default;
  explicit FourierVector(int order) : c(Eigen::VectorXcd::Zero(2 * order + 1)), M(order) {}

  std::complex<double> at(int n) const { return c(n + M); }
  std::complex<double>& at(int n) { return c(n + M); }

  // Pointwise value sum_n c_n e^{2 pi i n theta}.
  std::complex<double> evaluate(double theta) const {
    const double two_pi = 2.0 * std::numbers::pi;
    std::complex<double> rot(std::cos(two_pi * theta), std::sin(two_pi * theta));
    std::complex<double> pos = 0.0, neg = 0.0;
    for (int n = M; n >= 1; --n) {
      pos = (pos + at(n)) * rot;
      neg = (neg + at(-n)) * std::conj(rot);
    }
    return at(0) + pos + neg;
  }

  bool is_real_symmetric(double tol = 1e-14) const {
    for (int n = 0; n <= M; ++n)
      if (std::abs(at(-n) - std::conj(at(n))) > tol) return false;
    return true;
  }
};

struct KbSpace {
  double b;
  int M;

  KbSpace(double b_, int M_) : b(b_), M(M_) {
    if (!(b > 1.0)) throw domain_error("KbSpace: weight base must satisfy b > 1");
  }

  double norm(const FourierVector& u) const {
    double s = 0.0;
    for (int n = -u.M; n <= u.M; ++n) s += std::pow(b, std::abs(n)) * std::norm(u.at(n));
    return std::sqrt(s);
  }
};

inline double kb_norm(const FourierVector& u, double b) { return KbSpace(b, u.M).norm(u); }

// Coefficients of a boundary function on a 4M-point grid, lags |n| <= 2M.
// Direct sums: the grids here are a few hundred points, far below where an
// FFT would matter.
inline FourierVector boundary_coefficients(const std::function<std::complex<double>(double)>& f, int M) {
  const int N = 4 * M;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXcd samples(N);
  for (int k = 0; k < N; ++k) samples(k) = f(static_cast<double>(k) / N);
  FourierVector out(2 * M);
  for (int n = -2 * M; n <= 2 * M; ++n) {
    std::complex<double> s{};
    for (int k = 0; k < N; ++k) {
      double ang = -two_pi * static_cast<double>(n) * k / N;
      s += samples(k) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out.at(n) = s / static_cast<double>(N);
  }
  return out;
}

}
