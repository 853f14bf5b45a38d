#pragma once

#include <Eigen/Dense>
#include <vector>

#include "innerdyn/fourier.hpp"
#include "innerdyn/inner_function.hpp"

namespace innerdyn {

// Truncated matrix of the transfer operator on the Fourier basis. Column
// ell >= 1 of the analytic block holds a(k, ell) = conj(coeff_k(phi^ell));
// the negative-frequency block is its conjugate and column 0 is the
// constants' column e_0 (the operator fixes constants when phi(0) = 0).
struct TransferMatrix {
  InnerFunctionSpec spec;
  int M = 0;
  int kappa = 0;                      // vanishing order of phi at 0
  Eigen::MatrixXcd analytic;          // (ell-1, k-1) -> a(k, ell), 1 <= k, ell <= M
  std::vector<double> truncation_mass;  // per column ell: 1 - sum_k |a(k, ell)|^2

  Complex a(int k, int ell) const;    // entry on the analytic block indices
  Eigen::MatrixXcd full() const;      // (2M+1)^2 matrix over indices [-M, M]
};

TransferMatrix build_transfer_matrix(const InnerFunctionSpec& spec, int M);

// Same construction from an explicit Taylor series with c_0 = 0 (used for
// semigroup checks on iterated maps).
TransferMatrix build_transfer_matrix_from_series(const PowerSeries<Complex>& series,
                                                 const InnerFunctionSpec& origin_spec);

FourierVector apply_transfer(const TransferMatrix& T, const FourierVector& u);

struct BooleReport {
  double residual = 0.0;    // k_b norm (b = 1.2) of T p_z - p_{phi(z)}
  double tail_bound = 0.0;  // geometric bound on the truncated coefficient tails
  Complex phi_z;
};

BooleReport boole_check(const InnerFunctionSpec& spec, Complex z, int M);

FourierVector poisson_coefficients(Complex z, int M);

struct GapEntry {
  int N = 0;
  double measured_norm = 0.0;  // largest singular value of D_b T^N D_b^{-1}, mean-zero block
  double bicycle_bound = 0.0;  // (b/sqrt(b-1)) b^{-kappa^N/2}
};

struct SpectralReport {
  double b = 0.0;
  int M = 0;
  std::vector<GapEntry> entries;
  double wheelchair_fit_rho = 0.0;  // log-linear fit of measured_norm over N
  double second_eigenvalue_modulus = 0.0;
};

SpectralReport gap_report(const InnerFunctionSpec& spec, double b, int N_max, int M);

struct EssentialRadiusReport {
  double estimate = 0.0;        // second-largest eigenvalue modulus at order M
  double estimate_half = 0.0;   // same at order M/2 (convergence diagnostic)
  double phi_prime_modulus = 0.0;
};

EssentialRadiusReport essential_radius_estimate(const InnerFunctionSpec& spec, double b, int M);

}
