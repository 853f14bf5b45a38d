#include "innerdyn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "innerdyn/errors.hpp"
#include "innerdyn/parallel.hpp"

namespace innerdyn {

namespace {

TransferMatrix build_from_taylor(const PowerSeries<Complex>& f, InnerFunctionSpec spec) {
  const int M = f.order();
  if (std::abs(f.c(0)) != 0.0) {
    throw precondition_error("build_transfer_matrix: map must fix the origin "
                             "(conjugate by the Denjoy-Wolff Mobius map first)");
  }
  int kappa = 0;
  for (int n = 1; n <= M; ++n) {
    if (std::abs(f.c(n)) > 1e-13) {
      kappa = n;
      break;
    }
  }
  if (kappa == 0) {
    throw precondition_error("build_transfer_matrix: map is numerically constant");
  }

  TransferMatrix T;
  T.spec = std::move(spec);
  T.M = M;
  T.kappa = kappa;
  T.analytic.setZero(M, M);
  T.truncation_mass.assign(M, 0.0);

  // Powers of the map; coefficients up to M of phi^ell only involve
  // coefficients up to M of phi^(ell-1), so the chain is truncation-exact.
  std::vector<PowerSeries<Complex>> powers;
  powers.reserve(M);
  powers.push_back(f);
  for (int ell = 2; ell <= M; ++ell) powers.push_back(series_mul(powers.back(), f));

  parallel_for(M, [&](int i) {
    const PowerSeries<Complex>& p = powers[i];
    double mass = 0.0;
    for (int k = 1; k <= M; ++k) {
      T.analytic(i, k - 1) = std::conj(p.c(k));
      mass += std::norm(p.c(k));
    }
    T.truncation_mass[i] = 1.0 - mass;
  });
  return T;
}

Eigen::MatrixXcd weighted_block(const TransferMatrix& T, double b) {
  Eigen::MatrixXcd W = T.analytic;
  for (int i = 0; i < T.M; ++i)
    for (int j = 0; j < T.M; ++j)
      W(i, j) *= std::pow(b, 0.5 * double(i - j));
  return W;
}

double largest_eigen_modulus(const Eigen::MatrixXcd& A) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, false);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("essential_radius_estimate: eigen-decomposition failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Complex TransferMatrix::a(int k, int ell) const {
  if (k < 1 || k > M || ell < 1 || ell > M) {
    throw precondition_error("TransferMatrix::a: indices outside the analytic block");
  }
  return analytic(ell - 1, k - 1);
}

Eigen::MatrixXcd TransferMatrix::full() const {
  const int n = 2 * M + 1;
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(n, n);
  F(M, M) = 1.0;
  for (int ell = 1; ell <= M; ++ell) {
    for (int k = 1; k <= M; ++k) {
      F(M + ell, M + k) = analytic(ell - 1, k - 1);
      F(M - ell, M - k) = std::conj(analytic(ell - 1, k - 1));
    }
  }
  return F;
}

TransferMatrix build_transfer_matrix(const InnerFunctionSpec& spec, int M) {
  if (M < 1) throw precondition_error("build_transfer_matrix: order must be positive");
  if (!spec.fixes_origin()) {
    throw precondition_error("build_transfer_matrix: map must fix the origin "
                             "(conjugate by the Denjoy-Wolff Mobius map first)");
  }
  if (spec.is_mobius()) {
    throw unsupported_error("build_transfer_matrix: Mobius maps are excluded "
                            "(the transfer operator is a rotation, not a contraction)");
  }
  return build_from_taylor(taylor(spec, M), spec);
}

TransferMatrix build_transfer_matrix_from_series(const PowerSeries<Complex>& series,
                                                 const InnerFunctionSpec& origin_spec) {
  return build_from_taylor(series, origin_spec);
}

FourierVector apply_transfer(const TransferMatrix& T, const FourierVector& u) {
  if (u.M != T.M) throw precondition_error("apply_transfer: truncation orders differ");
  FourierVector v(T.M);
  v.at(0) = u.at(0);
  for (int ell = 1; ell <= T.M; ++ell) {
    Complex pos = 0.0, neg = 0.0;
    for (int k = 1; k <= T.M; ++k) {
      pos += T.analytic(ell - 1, k - 1) * u.at(k);
      neg += std::conj(T.analytic(ell - 1, k - 1)) * u.at(-k);
    }
    v.at(ell) = pos;
    v.at(-ell) = neg;
  }
  return v;
}

FourierVector poisson_coefficients(Complex z, int M) {
  if (std::abs(z) >= 1.0) throw precondition_error("poisson_coefficients: point must be in the open disc");
  FourierVector p(M);
  Complex pos = 1.0, neg = 1.0;
  p.at(0) = 1.0;
  for (int n = 1; n <= M; ++n) {
    pos *= std::conj(z);
    neg *= z;
    p.at(n) = pos;
    p.at(-n) = neg;
  }
  return p;
}

BooleReport boole_check(const InnerFunctionSpec& spec, Complex z, int M) {
  if (std::abs(z) > 0.7) {
    throw precondition_error("boole_check: |z| must be at most 0.7 so coefficient "
                             "tails beyond the truncation are negligible");
  }
  const double b = 1.2;
  TransferMatrix T = build_transfer_matrix(spec, M);
  BooleReport report;
  report.phi_z = eval_disk(spec, z);

  FourierVector lhs = apply_transfer(T, poisson_coefficients(z, M));
  FourierVector rhs = poisson_coefficients(report.phi_z, M);
  FourierVector diff(M);
  for (int n = -M; n <= M; ++n) diff.at(n) = lhs.at(n) - rhs.at(n);
  report.residual = kb_norm(diff, b);

  const double r = std::max(std::abs(z), std::abs(report.phi_z));
  const double q = b * r * r;
  report.tail_bound = 2.0 * std::sqrt(2.0 * std::pow(q, M + 1) / (1.0 - q));
  return report;
}

SpectralReport gap_report(const InnerFunctionSpec& spec, double b, int N_max, int M) {
  if (b <= 1.0) throw precondition_error("gap_report: weight base must exceed 1");
  if (N_max < 1) throw precondition_error("gap_report: need at least one power");

  TransferMatrix T = build_transfer_matrix(spec, M);
  SpectralReport report;
  report.b = b;
  report.M = M;

  const Eigen::MatrixXcd W = weighted_block(T, b);
  const double bicycle_prefactor = b / std::sqrt(b - 1.0);

  Eigen::MatrixXcd P = W;
  for (int N = 1; N <= N_max; ++N) {
    if (N > 1) P = P * W;
    GapEntry entry;
    entry.N = N;
    entry.measured_norm = P.jacobiSvd().singularValues()(0);
    entry.bicycle_bound = bicycle_prefactor * std::pow(b, -0.5 * std::pow(double(T.kappa), N));
    report.entries.push_back(entry);
  }

  // Log-linear fit of the measured norms over every N with a usable value.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const GapEntry& e : report.entries) {
    if (e.measured_norm <= 1e-300) continue;
    const double x = double(e.N), y = std::log(e.measured_norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    report.wheelchair_fit_rho = std::exp(slope);
  }
  report.second_eigenvalue_modulus = largest_eigen_modulus(W);
  return report;
}

EssentialRadiusReport essential_radius_estimate(const InnerFunctionSpec& spec, double b, int M) {
  if (b <= 1.0) throw precondition_error("essential_radius_estimate: weight base must exceed 1");
  if (M < 4) throw precondition_error("essential_radius_estimate: order too small");

  TransferMatrix T = build_transfer_matrix(spec, M);
  EssentialRadiusReport report;
  report.phi_prime_modulus = std::abs(eval_derivative(spec, 0.0).phi_prime);

  const Eigen::MatrixXcd W = weighted_block(T, b);
  report.estimate = largest_eigen_modulus(W);
  const int H = M / 2;
  report.estimate_half = largest_eigen_modulus(W.topLeftCorner(H, H));
  return report;
}

}  // namespace innerdyn
