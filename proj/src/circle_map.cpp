#include "innerdyn/circle_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "innerdyn/rng.hpp"

namespace innerdyn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Argument of one Blaschke factor along the boundary, as a continuous
// function of theta: with u = 1 - alpha e^{-2 pi i theta},
//   b_alpha(chi(theta)) = c_alpha chi(theta) u / conj(u),
// and Re u >= 1 - |alpha| > 0 keeps the principal branch continuous.
double blaschke_argument(Complex alpha, double theta) {
  double base = kTwoPi * theta;
  if (alpha == Complex{0.0, 0.0}) return base;
  Complex u = 1.0 - alpha * Complex(std::cos(base), -std::sin(base));
  return std::arg(-std::conj(alpha) / alpha) + base + 2.0 * std::arg(u);
}

// Poisson kernel p_alpha(theta) = (1-|alpha|^2)/|chi-alpha|^2 = Re (chi+alpha)/(chi-alpha).
double poisson(Complex alpha, double theta) {
  Complex chi(std::cos(kTwoPi * theta), std::sin(kTwoPi * theta));
  return (1.0 - std::norm(alpha)) / std::norm(chi - alpha);
}

double poisson_derivative(Complex alpha, double theta) {
  if (alpha == Complex{0.0, 0.0}) return 0.0;
  Complex chi(std::cos(kTwoPi * theta), std::sin(kTwoPi * theta));
  Complex den = (chi - alpha) * (chi - alpha);
  return std::real(Complex(0.0, -2.0 * kTwoPi) * alpha * chi / den);
}

double reduced_half(double x) {
  // Reduce to (-1/2, 1/2] for stable sin/cot arguments.
  double r = x - std::floor(x);
  if (r > 0.5) r -= 1.0;
  return r;
}

}  // namespace

Restriction::Restriction(InnerFunctionSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& atom : spec_.atoms) cuts_.push_back(atom.location);
  std::sort(cuts_.begin(), cuts_.end(), [](CirclePoint a, CirclePoint b) { return a.t < b.t; });
}

double Restriction::blaschke_lift(double theta) const {
  double arg = std::arg(spec_.rotation);
  for (const auto& zero : spec_.zeros) arg += zero.mult * blaschke_argument(zero.alpha, theta);
  return arg / kTwoPi;
}

double Restriction::blaschke_derivative(double theta) const {
  double d = 0.0;
  for (const auto& zero : spec_.zeros) d += zero.mult * poisson(zero.alpha, theta);
  return d;
}

double Restriction::blaschke_second_derivative(double theta) const {
  double d = 0.0;
  for (const auto& zero : spec_.zeros) d += zero.mult * poisson_derivative(zero.alpha, theta);
  return d;
}

double Restriction::lift(double theta) const {
  double value = blaschke_lift(theta);
  for (const auto& atom : spec_.atoms) {
    double delta = reduced_half(theta - atom.location.t);
    value -= atom.mass / kTwoPi / std::tan(kPi * delta);
  }
  return value;
}

double Restriction::derivative(double theta) const {
  double d = blaschke_derivative(theta);
  for (const auto& atom : spec_.atoms) {
    double s = std::sin(kPi * reduced_half(theta - atom.location.t));
    d += 0.5 * atom.mass / (s * s);
  }
  return d;
}

double Restriction::second_derivative(double theta) const {
  double d = blaschke_second_derivative(theta);
  for (const auto& atom : spec_.atoms) {
    double delta = reduced_half(theta - atom.location.t);
    double s = std::sin(kPi * delta);
    d -= kPi * atom.mass * std::cos(kPi * delta) / (s * s * s);
  }
  return d;
}

int Restriction::degree() const {
  int d = 0;
  for (const auto& zero : spec_.zeros) d += zero.mult;
  return d;
}

RestrictionValue evaluate_restriction(const Restriction& tau, CirclePoint theta) {
  for (const auto& cut : tau.branch_cuts())
    if (circular_distance(theta.t, cut.t) < 1e-12)
      throw domain_error("evaluate_restriction: theta lies on a branch cut (atom location)");
  RestrictionValue out;
  out.value = CirclePoint(tau.lift(theta.t));
  out.d1 = tau.derivative(theta.t);
  out.d2 = tau.second_derivative(theta.t);
  return out;
}

namespace {

// Solve lift(theta) = level on (lo, hi), where the lift is strictly
// increasing; bisection bracket followed by a Newton polish.
double solve_on_branch(const Restriction& tau, double lo, double hi, double level) {
  double flo = tau.lift(lo), fhi = tau.lift(hi);
  if (!(flo <= level && level <= fhi)) return std::numeric_limits<double>::quiet_NaN();
  double a = lo, b = hi;
  for (int i = 0; i < 200 && (b - a) > 1e-15 * std::max(1.0, std::fabs(a)); ++i) {
    double mid = 0.5 * (a + b);
    if (tau.lift(mid) < level)
      a = mid;
    else
      b = mid;
  }
  double x = 0.5 * (a + b);
  for (int i = 0; i < 4; ++i) {
    double f = tau.lift(x) - level;
    double d = tau.derivative(x);
    double nx = x - f / d;
    if (nx <= lo || nx >= hi) break;
    x = nx;
  }
  if (std::fabs(tau.lift(x) - level) > 1e-9 * std::max(1.0, std::fabs(level)))
    throw numeric_error("preimages: root polish failed to reach the target level");
  return x;
}

}  // namespace

ClarkAtoms preimages(const Restriction& tau, CirclePoint x, double weight_threshold) {
  if (!(weight_threshold > 0.0)) throw domain_error("preimages: weight threshold must be positive");

  ClarkAtoms out;
  out.base = x;
  out.truncation_threshold = weight_threshold;
  out.total_mass = poisson(eval_disk(tau.spec(), Complex{0.0, 0.0}), x.t);

  const auto& cuts = tau.branch_cuts();
  if (cuts.empty()) {
    // Finite Blaschke product: the lift increases by the degree over one
    // turn; each branch theta in [0,1) meets every level x + n exactly once
    // for the degree-many integers n in [T(0) - x, T(1) - x).
    double t0 = tau.lift(0.0);
    int first = static_cast<int>(std::ceil(t0 - x.t - 1e-12));
    for (int n = first; n < first + tau.degree(); ++n) {
      double level = x.t + n;
      double y = solve_on_branch(tau, 0.0, 1.0, level);
      if (std::isnan(y)) {
        // Levels at the seam: shift the branch window by machine slack.
        y = solve_on_branch(tau, -1e-12, 1.0 + 1e-12, level);
        if (std::isnan(y)) throw numeric_error("preimages: level escaped the branch bracket");
      }
      out.points.push_back(CirclePoint(y));
      out.weights.push_back(1.0 / tau.derivative(y));
    }
  } else {
    // Branches between consecutive atoms; the lift spans all of R on each,
    // so solutions accumulate at the cuts with weights 1/tau' -> 0.
    const std::size_t k = cuts.size();
    for (std::size_t j = 0; j < k; ++j) {
      double lo = cuts[j].t;
      double hi = (j + 1 < k ? cuts[j + 1].t : cuts[0].t + 1.0);
      double mid = 0.5 * (lo + hi);
      double margin = 1e-13 * (hi - lo);
      auto solve_level = [&](double level) -> std::pair<double, double> {
        double a = lo + margin, b = hi - margin;
        // Expand the bracket geometrically toward the cuts until the level
        // is enclosed (the lift diverges at both ends).
        while (tau.lift(a) > level && a - lo > 1e-300) a = lo + (a - lo) / 16.0;
        while (tau.lift(b) < level && hi - b > 1e-300) b = hi - (hi - b) / 16.0;
        double y = solve_on_branch(tau, a, b, level);
        if (std::isnan(y)) throw numeric_error("preimages: level escaped the branch bracket");
        return {y, 1.0 / tau.derivative(y)};
      };
      double base_level = tau.lift(mid);
      int n0 = static_cast<int>(std::floor(base_level - x.t));
      // Walk levels upward then downward until the weights drop below the
      // truncation threshold.
      for (int n = n0;; ++n) {
        auto [y, w] = solve_level(x.t + n);
        if (w < weight_threshold) break;
        out.points.push_back(CirclePoint(y));
        out.weights.push_back(w);
      }
      for (int n = n0 - 1;; --n) {
        auto [y, w] = solve_level(x.t + n);
        if (w < weight_threshold) break;
        out.points.push_back(CirclePoint(y));
        out.weights.push_back(w);
      }
    }
  }

  // Deterministic order for reports: by circle position.
  std::vector<std::size_t> idx(out.points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return out.points[a].t < out.points[b].t; });
  ClarkAtoms sorted = out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sorted.points[i] = out.points[idx[i]];
    sorted.weights[i] = out.weights[idx[i]];
  }
  for (double w : sorted.weights) sorted.captured_mass += w;
  return sorted;
}

AdlerReport adler_report(const Restriction& tau, int grid, int d_max) {
  const auto& spec = tau.spec();
  if (spec.zeros.empty() && spec.atoms.empty())
    throw precondition_error("adler_report: spec must carry at least one zero or atom");
  if (!denjoy_wolff(spec).interior)
    throw unsupported_error("adler_report: requires an interior Denjoy-Wolff point");

  AdlerReport report;
  report.min_tau_prime = std::numeric_limits<double>::infinity();

  std::vector<double> thetas;
  thetas.reserve(grid);
  for (int i = 0; i < grid; ++i) {
    double theta = (i + 0.5) / grid;
    bool near_atom = false;
    for (const auto& cut : tau.branch_cuts())
      if (circular_distance(theta, cut.t) < 1e-6) near_atom = true;
    if (!near_atom) thetas.push_back(theta);
  }

  double sup_delta_blaschke = 0.0;
  bool blaschke_curved = false;
  for (const auto& zero : spec.zeros)
    if (zero.alpha != Complex{0.0, 0.0}) blaschke_curved = true;

  for (double theta : thetas) {
    double d1 = tau.derivative(theta);
    if (d1 < report.min_tau_prime) {
      report.min_tau_prime = d1;
      report.argmin_theta = theta;
    }
    double delta = std::fabs(tau.second_derivative(theta)) / (d1 * d1);
    report.sup_delta_tau = std::max(report.sup_delta_tau, delta);
    if (blaschke_curved && !spec.zeros.empty()) {
      double b1 = tau.blaschke_derivative(theta);
      if (b1 > 0.0)
        sup_delta_blaschke =
            std::max(sup_delta_blaschke, std::fabs(tau.blaschke_second_derivative(theta)) / (b1 * b1));
    }
  }

  double inverse_mass_sum = 0.0;
  for (const auto& atom : spec.atoms) inverse_mass_sum += 1.0 / atom.mass;
  report.analytic_bound = sup_delta_blaschke + 2.0 * kPi * inverse_mass_sum;

  double lower = 0.0;
  for (const auto& zero : spec.zeros)
    lower += zero.mult * (1.0 - std::abs(zero.alpha)) / (1.0 + std::abs(zero.alpha));
  report.lower_bound_tau_prime = lower + 0.5 * spec.atom_total_mass();

  // Least d <= d_max whose orbitwise chain-rule product exceeds 1 on the grid.
  for (int d = 1; d <= d_max; ++d) {
    double min_product = std::numeric_limits<double>::infinity();
    for (double theta : thetas) {
      double product = 1.0;
      double point = theta;
      bool valid = true;
      for (int step = 0; step < d; ++step) {
        for (const auto& cut : tau.branch_cuts())
          if (circular_distance(point, cut.t) < 1e-12) valid = false;
        if (!valid) break;
        product *= tau.derivative(point);
        point = CirclePoint::reduce(tau.lift(point));
      }
      if (valid) min_product = std::min(min_product, product);
    }
    if (min_product > 1.0) {
      report.expansion_power = d;
      report.expansion_beta = min_product;
      break;
    }
  }
  if (report.expansion_power == 0)
    throw numeric_error("adler_report: no expansion power d <= d_max with min (tau^d)' > 1");
  return report;
}

std::vector<CirclePoint> sample_invariant(const DenjoyWolffResult& dw, std::uint64_t seed, int n) {
  if (!dw.interior)
    throw domain_error("sample_invariant: boundary Denjoy-Wolff point has no invariant probability");
  CounterRng rng(derive_key(seed, 0x706f6973736f6eULL));
  Complex d = dw.point;
  std::vector<CirclePoint> samples(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform(static_cast<std::uint64_t>(i));
    Complex w(std::cos(kTwoPi * u), std::sin(kTwoPi * u));
    Complex m = (w + d) / (1.0 + std::conj(d) * w);
    samples[i] = CirclePoint(std::arg(m) / kTwoPi);
  }
  return samples;
}

OrbitResult orbit(const Restriction& tau, CirclePoint theta0, int n) {
  OrbitResult out;
  out.points.reserve(n + 1);
  double theta = theta0.t;
  for (int step = 0;; ++step) {
    for (const auto& cut : tau.branch_cuts()) {
      if (circular_distance(theta, cut.t) < 1e-12) {
        theta = CirclePoint::reduce(theta + 1e-9);
        out.perturbation_events.push_back(step);
        break;
      }
    }
    out.points.push_back(CirclePoint(theta));
    if (step == n) break;
    theta = CirclePoint::reduce(tau.lift(theta));
  }
  return out;
}

}
