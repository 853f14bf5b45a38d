#include "innerdyn/twisted.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "innerdyn/circle_map.hpp"
#include "innerdyn/errors.hpp"
#include "innerdyn/parallel.hpp"
#include "innerdyn/rng.hpp"

namespace innerdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Eigen::MatrixXcd weighted_full(const Eigen::MatrixXcd& J, int M, double b) {
  Eigen::MatrixXcd W = J;
  const int n = 2 * M + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      W(i, j) *= std::pow(b, 0.5 * double(std::abs(i - M) - std::abs(j - M)));
  return W;
}

Complex eig2x2_dominant(const Eigen::Matrix2cd& H, Complex& subdominant) {
  const Complex tr = H(0, 0) + H(1, 1);
  const Complex det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  const Complex disc = std::sqrt(tr * tr - 4.0 * det);
  Complex mu1 = 0.5 * (tr + disc);
  Complex mu2 = 0.5 * (tr - disc);
  if (std::abs(mu2) > std::abs(mu1)) std::swap(mu1, mu2);
  subdominant = mu2;
  return mu1;
}

// Whether the map is a pure monomial with rotation, tau(theta) = kappa theta + c.
bool monomial_like(const InnerFunctionSpec& spec, int& kappa_out) {
  if (!spec.atoms.empty()) return false;
  int k = 0;
  for (const Zero& z : spec.zeros) {
    if (std::abs(z.alpha) != 0.0) return false;
    k += z.mult;
  }
  if (k < 2) return false;
  kappa_out = k;
  return true;
}

double step_map(const Restriction& R, double theta) {
  for (const CirclePoint& cut : R.branch_cuts()) {
    if (circular_distance(theta, cut.t) < 1e-12) {
      theta = CirclePoint::reduce(theta + 1e-9);
      break;
    }
  }
  return CirclePoint::reduce(R.lift(theta));
}

// Per-trial centered Birkhoff sums S_i = sum_{j<n} psi(tau^j X_i), X_i drawn
// from the invariant measure. Trial i depends only on (seed, i), never on
// thread scheduling. Monomial maps walk an exact digit tape; iterating
// theta -> kappa theta mod 1 in floating point would collapse onto 0.
std::vector<double> mc_orbit_sums(const InnerFunctionSpec& spec, const Observable& psi,
                                  int n, int trials, std::uint64_t seed) {
  if (n < 1) throw precondition_error("mc orbit: need at least one step");
  if (trials < 1) throw precondition_error("mc orbit: need at least one trial");
  std::vector<double> sums(static_cast<std::size_t>(trials));

  int kappa = 0;
  if (monomial_like(spec, kappa)) {
    const double c = CirclePoint::reduce(std::arg(spec.rotation) / kTwoPi);
    const double delta = -c / double(kappa - 1);
    const CounterRng rng(derive_key(seed, 0x646967697473ULL));
    parallel_for(trials, [&](int i) {
      DigitTape tape(rng, static_cast<std::uint64_t>(i), kappa, n + 70);
      DigitTape::Window w(tape);
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        s += psi.evaluate(CirclePoint::reduce(w.value() + delta));
        if (j + 1 < n) w.advance();
      }
      sums[static_cast<std::size_t>(i)] = s;
    });
    return sums;
  }

  const DenjoyWolffResult dw = denjoy_wolff(spec);
  if (!dw.interior) {
    throw precondition_error("mc orbit: invariant sampling needs an interior Denjoy-Wolff point");
  }
  const Complex d = dw.point;
  const Restriction R(spec);
  const CounterRng rng(derive_key(seed, 0x696e6974ULL));
  parallel_for(trials, [&](int i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    const Complex w = std::polar(1.0, kTwoPi * u);
    double theta = CirclePoint::reduce(std::arg((w + d) / (1.0 + std::conj(d) * w)) / kTwoPi);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      s += psi.evaluate(theta);
      if (j + 1 < n) theta = step_map(R, theta);
    }
    sums[static_cast<std::size_t>(i)] = s;
  });
  return sums;
}

Observable centered(const InnerFunctionSpec& spec, const Observable& psi) {
  Observable out = psi;
  out.fourier.at(0) -= observable_mean(spec, psi);
  return out;
}

}  // namespace

void Observable::validate() const {
  if (!(analytic_radius_hint > 1.0)) {
    throw domain_error("Observable: analyticity radius hint must exceed 1");
  }
  if (!fourier.is_real_symmetric(1e-14)) {
    throw precondition_error("Observable: coefficients must be conjugate-symmetric "
                             "(real-valued on the circle)");
  }
}

bool Observable::non_constant() const {
  for (int n = 1; n <= fourier.M; ++n) {
    if (std::abs(fourier.at(n)) > 1e-12 || std::abs(fourier.at(-n)) > 1e-12) return true;
  }
  return false;
}

Observable cosine_observable(double amplitude) {
  Observable psi;
  psi.fourier = FourierVector(1);
  psi.fourier.at(1) = 0.5 * amplitude;
  psi.fourier.at(-1) = 0.5 * amplitude;
  return psi;
}

Observable constant_observable(double value) {
  Observable psi;
  psi.fourier = FourierVector(0);
  psi.fourier.at(0) = value;
  return psi;
}

double observable_mean(const InnerFunctionSpec& spec, const Observable& psi) {
  const DenjoyWolffResult dw = denjoy_wolff(spec);
  if (!dw.interior) {
    throw precondition_error("observable_mean: invariant measure needs an interior "
                             "Denjoy-Wolff point");
  }
  const Complex d = dw.point;
  const double dd = std::norm(d);
  const int N = 2048;
  double mean = 0.0;
  for (int k = 0; k < N; ++k) {
    const double theta = double(k) / N;
    const double p = (1.0 - dd) / std::norm(CirclePoint(theta).chi() - d);
    mean += psi.evaluate(theta) * p;
  }
  return mean / N;
}

FourierVector exp_observable(const Observable& psi, Complex z, int M) {
  psi.validate();
  if (z == Complex(0.0, 0.0)) {
    FourierVector out(M);
    out.at(0) = 1.0;
    return out;
  }
  FourierVector wide = boundary_coefficients(
      [&](double theta) { return std::exp(z * psi.evaluate(theta)); }, M);
  FourierVector out(M);
  for (int n = -M; n <= M; ++n) out.at(n) = wide.at(n);
  return out;
}

TwistedMatrix build_twisted(const TransferMatrix& T, const Observable& psi, Complex z, double b) {
  psi.validate();
  if (!(b > 1.0)) throw domain_error("build_twisted: weight base must exceed 1");
  if (b >= psi.analytic_radius_hint) {
    throw domain_error("build_twisted: weight base must stay below the observable's "
                       "analyticity radius");
  }
  TwistedMatrix P;
  P.base = T;
  P.z = z;
  P.b = b;
  const int M = T.M;
  if (z == Complex(0.0, 0.0)) {
    P.mult_coeffs = FourierVector(2 * M);
    P.mult_coeffs.at(0) = 1.0;
    P.matrix = T.full();
    return P;
  }
  P.mult_coeffs = boundary_coefficients(
      [&](double theta) { return std::exp(z * psi.evaluate(theta)); }, M);
  const int n = 2 * M + 1;
  Eigen::MatrixXcd C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = P.mult_coeffs.at(i - j);
  P.matrix = T.full() * C;
  return P;
}

LeadingEigen leading_eigen(const TwistedMatrix& P) {
  const int M = P.base.M;
  const int n = 2 * M + 1;
  const Eigen::MatrixXcd A = weighted_full(P.matrix, M, P.b);

  // Two-column power iteration: the second column tracks the subdominant
  // modulus so the spectral-gap requirement can be checked.
  Eigen::MatrixXcd V(n, 2);
  V.setZero();
  V(M, 0) = 1.0;
  const CounterRng rng(derive_key(0x74776973ULL, 0));
  for (int i = 0; i < n; ++i) {
    V(i, 1) = Complex(rng.uniform(2 * i) - 0.5, rng.uniform(2 * i + 1) - 0.5);
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr0(V);
  Eigen::MatrixXcd Q = qr0.householderQ() * Eigen::MatrixXcd::Identity(n, 2);

  Complex lambda = 1.0, sub = 0.0;
  int stable = 0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::MatrixXcd W = A * Q;
    const Eigen::Matrix2cd H = Q.adjoint() * W;
    const Complex prev = lambda;
    lambda = eig2x2_dominant(H, sub);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(W);
    Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, 2);
    if (std::abs(lambda - prev) <= 1e-13 * std::max(1.0, std::abs(lambda))) {
      if (++stable >= 3) break;
    } else {
      stable = 0;
    }
  }
  const double ratio = std::abs(sub) > 0.0 ? std::abs(lambda) / std::abs(sub)
                                           : std::numeric_limits<double>::infinity();
  if (!(ratio > 1.05)) {
    throw numeric_error("leading_eigen: no spectral gap detected (top moduli ratio " +
                        std::to_string(ratio) + "); the twist is outside the perturbative regime");
  }

  // Rayleigh refinement of the eigenpair from the converged 2-space.
  const Eigen::Matrix2cd H = Q.adjoint() * (A * Q);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> small(H, true);
  int pick = std::abs(small.eigenvalues()(0)) >= std::abs(small.eigenvalues()(1)) ? 0 : 1;
  Complex refined = small.eigenvalues()(pick);
  Eigen::VectorXcd v = Q * small.eigenvectors().col(pick);

  LeadingEigen out;
  out.lambda = refined;
  out.gap_ratio = ratio;
  out.eigenvector = FourierVector(M);
  for (int i = 0; i < n; ++i) out.eigenvector.c(i) = v(i) * std::pow(P.b, -0.5 * std::abs(i - M));
  // Fix the phase and scale so reports are reproducible.
  int arg_max = 0;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(out.eigenvector.c(i)) > best) {
      best = std::abs(out.eigenvector.c(i));
      arg_max = i;
    }
  }
  if (best > 0.0) {
    const Complex scale = std::abs(out.eigenvector.c(arg_max)) / out.eigenvector.c(arg_max);
    out.eigenvector.c *= scale / out.eigenvector.c.norm();
  }
  return out;
}

Complex dominant_eigenvalue(const TwistedMatrix& P) {
  const Eigen::MatrixXcd A = weighted_full(P.matrix, P.base.M, P.b);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, false);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("dominant_eigenvalue: eigen-decomposition failed");
  }
  Complex best = solver.eigenvalues()(0);
  for (int i = 1; i < solver.eigenvalues().size(); ++i) {
    const Complex mu = solver.eigenvalues()(i);
    if (std::abs(mu) > std::abs(best) + 1e-15 ||
        (std::abs(mu) > std::abs(best) - 1e-15 &&
         (mu.real() > best.real() + 1e-15 ||
          (mu.real() > best.real() - 1e-15 && mu.imag() > best.imag())))) {
      best = mu;
    }
  }
  return best;
}

double sigma2_from_eigen(const InnerFunctionSpec& spec, const Observable& psi, double h, int M,
                         double b) {
  psi.validate();
  if (!(h > 0.0)) throw precondition_error("sigma2_from_eigen: step must be positive");
  const Observable psi_c = centered(spec, psi);
  const TransferMatrix T = build_transfer_matrix(spec, M);

  auto g = [&](double t) {
    const Complex lambda = leading_eigen(build_twisted(T, psi_c, Complex(0.0, t), b)).lambda;
    return std::log(std::abs(lambda));
  };
  // 5-point second derivative of the even function g with g(0) = 0,
  // Richardson-extrapolated across step halving.
  auto estimate = [&](double step) {
    return (2.0 * g(2.0 * step) - 32.0 * g(step)) / (12.0 * step * step);
  };
  const double s1 = estimate(h);
  const double s2 = estimate(0.5 * h);
  const double sigma2 = (16.0 * s2 - s1) / 15.0;
  if (sigma2 < -1e-8) {
    throw numeric_error("sigma2_from_eigen: negative variance estimate " +
                        std::to_string(sigma2));
  }
  return sigma2;
}

MonteCarloSigma2 sigma2_monte_carlo(const InnerFunctionSpec& spec, const Observable& psi, int n,
                                    int trials, std::uint64_t seed) {
  psi.validate();
  const Observable psi_c = centered(spec, psi);
  const std::vector<double> sums = mc_orbit_sums(spec, psi_c, n, trials, seed);

  MonteCarloSigma2 out;
  out.n = n;
  out.trials = trials;
  double mean = 0.0;
  for (double s : sums) mean += s * s / n;
  mean /= trials;
  double var = 0.0;
  for (double s : sums) {
    const double x = s * s / n - mean;
    var += x * x;
  }
  out.sigma2 = mean;
  out.standard_error = trials > 1 ? std::sqrt(var / (double(trials) - 1.0) / trials) : 0.0;
  return out;
}

double clt_check(const InnerFunctionSpec& spec, const Observable& psi, int n, int trials,
                 std::uint64_t seed) {
  psi.validate();
  const double sigma2 = sigma2_from_eigen(spec, psi);
  if (sigma2 <= 1e-8) {
    throw precondition_error("clt_check: degenerate observable (sigma^2 = 0); the "
                             "normalized sums have no Gaussian limit");
  }
  const double sigma = std::sqrt(sigma2);
  const Observable psi_c = centered(spec, psi);
  std::vector<double> z = mc_orbit_sums(spec, psi_c, n, trials, seed);
  const double scale = 1.0 / (sigma * std::sqrt(double(n)));
  for (double& v : z) v *= scale;
  std::sort(z.begin(), z.end());

  double ks = 0.0;
  const double N = double(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double cdf = standard_normal_cdf(z[i]);
    ks = std::max(ks, std::max(cdf - double(i) / N, double(i + 1) / N - cdf));
  }
  return ks;
}

ConditionalCltReport conditional_clt_check(const InnerFunctionSpec& spec, const Observable& psi,
                                           CirclePoint x, int n,
                                           const std::vector<double>& t_grid) {
  psi.validate();
  if (n < 0 || n > 20) {
    throw precondition_error("conditional_clt_check: depth must lie in [0, 20] "
                             "(the preimage tree is exhaustive)");
  }
  const double sigma2 = sigma2_from_eigen(spec, psi);
  if (sigma2 <= 1e-8) {
    throw precondition_error("conditional_clt_check: degenerate observable (sigma^2 = 0)");
  }
  const Observable psi_c = centered(spec, psi);
  const Restriction R(spec);

  struct Leaf {
    double z;
    double weight;
  };
  ConditionalCltReport report;
  std::vector<Leaf> leaves;

  if (n == 0) {
    leaves.push_back({0.0, 1.0});
  } else {
    const double denom = std::sqrt(sigma2) * std::sqrt(double(n));
    std::atomic<std::int64_t> nodes{0};

    // Children of a node, truncated once cumulative weight reaches
    // (1 - 1e-4) of the branch total.
    auto children = [&](CirclePoint p) {
      ClarkAtoms pre = preimages(R, p, 1e-6);
      std::vector<std::pair<CirclePoint, double>> kept(pre.points.size());
      for (std::size_t i = 0; i < pre.points.size(); ++i) kept[i] = {pre.points[i], pre.weights[i]};
      std::sort(kept.begin(), kept.end(),
                [](const auto& a, const auto& b) { return a.second > b.second; });
      double cum = 0.0;
      std::size_t keep = kept.size();
      for (std::size_t i = 0; i < kept.size(); ++i) {
        cum += kept[i].second;
        if (cum >= (1.0 - 1e-4) * pre.total_mass) {
          keep = i + 1;
          break;
        }
      }
      kept.resize(keep);
      return kept;
    };

    auto walk = [&](auto&& self, CirclePoint p, int depth, double weight, double psum,
                    std::vector<Leaf>& sink) -> void {
      if (nodes.fetch_add(1, std::memory_order_relaxed) >= 10'000'000) {
        throw resource_error("conditional_clt_check: preimage tree exceeded 1e7 nodes");
      }
      for (const auto& [y, w] : children(p)) {
        const double s = psum + psi_c.evaluate(y.t);
        if (depth + 1 == n) {
          sink.push_back({s / denom, weight * w});
        } else {
          self(self, y, depth + 1, weight * w, s, sink);
        }
      }
    };

    const auto top = children(x);
    std::vector<std::vector<Leaf>> partial(top.size());
    parallel_for(static_cast<int>(top.size()), [&](int i) {
      const auto& [y, w] = top[i];
      const double s = psi_c.evaluate(y.t);
      if (n == 1) {
        partial[i].push_back({s / denom, w});
      } else {
        walk(walk, y, 1, w, s, partial[i]);
      }
    });
    for (auto& part : partial) leaves.insert(leaves.end(), part.begin(), part.end());
  }

  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    return a.z < b.z || (a.z == b.z && a.weight < b.weight);
  });
  report.leaves = static_cast<std::int64_t>(leaves.size());
  for (const Leaf& leaf : leaves) report.weight_sum += leaf.weight;

  double sup = 0.0;
  for (double t : t_grid) {
    double mass = 0.0;
    for (const Leaf& leaf : leaves) {
      if (leaf.z <= t) mass += leaf.weight;
      else break;
    }
    sup = std::max(sup, std::abs(mass - standard_normal_cdf(t)));
  }
  report.sup_error = sup;
  return report;
}

LltReport llt_check(const InnerFunctionSpec& spec, const Observable& psi, int n, int trials,
                    double interval_length, std::uint64_t seed) {
  psi.validate();
  if (!(interval_length > 0.0)) {
    throw precondition_error("llt_check: interval length must be positive");
  }
  const double sigma2 = sigma2_from_eigen(spec, psi);
  if (sigma2 <= 1e-8) {
    throw precondition_error("llt_check: degenerate observable (sigma^2 = 0)");
  }
  const double sigma = std::sqrt(sigma2);
  const Observable psi_c = centered(spec, psi);
  const std::vector<double> sums = mc_orbit_sums(spec, psi_c, n, trials, seed);

  LltReport report;
  report.sigma2 = sigma2;
  report.n = n;
  report.trials = trials;
  for (double kappa : {0.0, 1.0}) {
    const double center = kappa * sigma * std::sqrt(double(n));
    std::int64_t hits = 0;
    for (double s : sums) {
      if (std::abs(s - center) <= 0.5 * interval_length) ++hits;
    }
    if (hits < 100) {
      throw numeric_error("llt_check: fewer than 100 interval hits at kappa = " +
                          std::to_string(kappa) + "; widen the interval or add trials");
    }
    LltEntry entry;
    entry.kappa = kappa;
    entry.hits = hits;
    entry.estimate = sigma * std::sqrt(double(n)) * (double(hits) / trials) / interval_length;
    entry.target = std::exp(-0.5 * kappa * kappa) / std::sqrt(kTwoPi);
    entry.relative_error = std::abs(entry.estimate - entry.target) / entry.target;
    report.entries.push_back(entry);
  }
  return report;
}

AperiodicityScan aperiodicity_scan(const InnerFunctionSpec& spec, const Observable& psi,
                                   const std::vector<double>& t_grid, int M, double b) {
  psi.validate();
  if (!psi.non_constant()) {
    throw precondition_error("aperiodicity_scan: observable must be non-constant");
  }
  const TransferMatrix T = build_transfer_matrix(spec, M);
  AperiodicityScan scan;
  std::vector<double> kept;
  for (double t : t_grid) {
    if (std::abs(t) >= 0.05) kept.push_back(t);
  }
  scan.rows.resize(kept.size());
  parallel_for(static_cast<int>(kept.size()), [&](int i) {
    const TwistedMatrix P = build_twisted(T, psi, Complex(0.0, kept[i]), b);
    scan.rows[i] = {kept[i], dominant_eigenvalue(P)};
  });
  for (const ScanRow& row : scan.rows) {
    scan.max_modulus = std::max(scan.max_modulus, std::abs(row.lambda));
  }
  return scan;
}

}  // namespace innerdyn
