#pragma once

#include <cstdint>
#include <vector>

#include "innerdyn/fourier.hpp"
#include "innerdyn/transfer.hpp"

namespace innerdyn {

// Real-valued observable on the circle, held as a trig polynomial together
// with a radius B > 1 certifying membership in k_B.
struct Observable {
  FourierVector fourier;
  double analytic_radius_hint = 4.0;

  void validate() const;
  bool non_constant() const;
  double evaluate(double theta) const { return fourier.evaluate(theta).real(); }
};

Observable cosine_observable(double amplitude = 1.0);
Observable constant_observable(double value);

// Mean of psi against the invariant measure of the boundary map (the harmonic
// measure at the Denjoy-Wolff point), by 2048-point quadrature.
double observable_mean(const InnerFunctionSpec& spec, const Observable& psi);

// Twist of the transfer operator: f -> T(e^{z psi} f).
struct TwistedMatrix {
  TransferMatrix base;
  Complex z;
  double b = 2.0;               // working weight base, 1 < b < B
  FourierVector mult_coeffs;    // coefficients of e^{z psi}, lags |n| <= 2M
  Eigen::MatrixXcd matrix;      // (2M+1)^2 over frequencies [-M, M]
};

FourierVector exp_observable(const Observable& psi, Complex z, int M);

TwistedMatrix build_twisted(const TransferMatrix& T, const Observable& psi, Complex z,
                            double b = 2.0);

struct LeadingEigen {
  Complex lambda;
  FourierVector eigenvector;
  double gap_ratio = 0.0;  // |lambda| over the next modulus seen by the iteration
};

LeadingEigen leading_eigen(const TwistedMatrix& P);

// Dominant eigenvalue without the spectral-gap requirement (for scans that
// run far outside the perturbative regime).
Complex dominant_eigenvalue(const TwistedMatrix& P);

double sigma2_from_eigen(const InnerFunctionSpec& spec, const Observable& psi,
                         double h = 1e-3, int M = 64, double b = 2.0);

struct MonteCarloSigma2 {
  double sigma2 = 0.0;
  double standard_error = 0.0;
  int n = 0;
  int trials = 0;
};

MonteCarloSigma2 sigma2_monte_carlo(const InnerFunctionSpec& spec, const Observable& psi,
                                    int n, int trials, std::uint64_t seed);

double clt_check(const InnerFunctionSpec& spec, const Observable& psi, int n, int trials,
                 std::uint64_t seed);

struct ConditionalCltReport {
  double sup_error = 0.0;
  double weight_sum = 0.0;   // tree mass; tau-hat^n 1 at the base point
  std::int64_t leaves = 0;
};

ConditionalCltReport conditional_clt_check(const InnerFunctionSpec& spec, const Observable& psi,
                                           CirclePoint x, int n, const std::vector<double>& t_grid);

struct LltEntry {
  double kappa = 0.0;
  double estimate = 0.0;      // sigma sqrt(n) P(psi_n in n E psi + kappa sigma sqrt(n) + I)/|I|
  double target = 0.0;        // e^{-kappa^2/2}/sqrt(2 pi)
  double relative_error = 0.0;
  std::int64_t hits = 0;
};

struct LltReport {
  std::vector<LltEntry> entries;  // kappa = 0 and kappa = 1
  double sigma2 = 0.0;
  int n = 0;
  int trials = 0;
};

LltReport llt_check(const InnerFunctionSpec& spec, const Observable& psi, int n, int trials,
                    double interval_length, std::uint64_t seed);

struct ScanRow {
  double t = 0.0;
  Complex lambda;
};

struct AperiodicityScan {
  std::vector<ScanRow> rows;
  double max_modulus = 0.0;
};

AperiodicityScan aperiodicity_scan(const InnerFunctionSpec& spec, const Observable& psi,
                                   const std::vector<double>& t_grid, int M = 64, double b = 2.0);

}
