#include "innerdyn/inner_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace innerdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex unit_circle(double t) { return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)}; }

Complex blaschke_constant(Complex alpha) {
  if (alpha == Complex{0.0, 0.0}) return {1.0, 0.0};
  return -std::conj(alpha) / alpha;
}

Complex blaschke_factor(Complex alpha, Complex z) {
  return blaschke_constant(alpha) * (z - alpha) / (1.0 - std::conj(alpha) * z);
}

Complex blaschke_factor_derivative(Complex alpha, Complex z) {
  Complex den = 1.0 - std::conj(alpha) * z;
  return blaschke_constant(alpha) * (1.0 - std::norm(alpha)) / (den * den);
}

Complex ipow(Complex base, int n) {
  Complex r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

}  // namespace

Complex CirclePoint::chi() const { return unit_circle(t); }

double circular_distance(double a, double b) {
  double d = std::fabs(CirclePoint::reduce(a) - CirclePoint::reduce(b));
  return std::min(d, 1.0 - d);
}

bool InnerFunctionSpec::is_mobius() const {
  return atoms.empty() && zeros.size() == 1 && zeros[0].mult == 1;
}

bool InnerFunctionSpec::fixes_origin() const {
  for (const auto& zero : zeros)
    if (zero.alpha == Complex{0.0, 0.0}) return true;
  return false;
}

int InnerFunctionSpec::vanishing_order() const {
  for (const auto& zero : zeros)
    if (zero.alpha == Complex{0.0, 0.0}) return zero.mult;
  return 0;
}

double InnerFunctionSpec::atom_total_mass() const {
  double s = 0.0;
  for (const auto& atom : atoms) s += atom.mass;
  return s;
}

void InnerFunctionSpec::validate() const {
  if (std::fabs(std::abs(rotation) - 1.0) > 1e-14)
    throw precondition_error("rotation: modulus must equal 1 within 1e-14, got " +
                             std::to_string(std::abs(rotation)));
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    if (!(std::abs(zeros[i].alpha) < 1.0))
      throw precondition_error("zeros[" + std::to_string(i) + "]: location must lie inside the open disc");
    if (zeros[i].mult <= 0)
      throw precondition_error("zeros[" + std::to_string(i) + "]: multiplicity must be positive");
    for (std::size_t j = i + 1; j < zeros.size(); ++j)
      if (zeros[i].alpha == zeros[j].alpha)
        throw precondition_error("zeros[" + std::to_string(j) + "]: duplicate zero location");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].mass > 0.0))
      throw precondition_error("atoms[" + std::to_string(i) + "]: mass must be positive");
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].location.t == atoms[j].location.t)
        throw precondition_error("atoms[" + std::to_string(j) + "]: duplicate atom location");
  }
  if (zeros.empty() && atoms.empty())
    throw precondition_error("spec: zeros and atoms are both empty (constant map)");
}

Complex eval_disk(const InnerFunctionSpec& spec, Complex z) {
  if (std::abs(z) > 1.0 + 1e-14) throw domain_error("eval_disk: point lies outside the closed disc");
  if (std::abs(z) > 1.0 - 1e-14) {
    for (const auto& atom : spec.atoms) {
      double zt = std::arg(z) / kTwoPi;
      if (circular_distance(zt, atom.location.t) < 1e-12)
        throw domain_error("eval_disk: boundary point coincides with a singular atom (essential singularity)");
    }
  }
  Complex value = spec.rotation;
  for (const auto& zero : spec.zeros) value *= ipow(blaschke_factor(zero.alpha, z), zero.mult);
  if (!spec.atoms.empty()) {
    Complex exponent{0.0, 0.0};
    for (const auto& atom : spec.atoms) {
      Complex w = atom.location.chi();
      exponent -= atom.mass * (w + z) / (w - z);
    }
    value *= std::exp(exponent);
  }
  return value;
}

DerivativeResult eval_derivative(const InnerFunctionSpec& spec, Complex z) {
  if (!(std::abs(z) < 1.0)) throw domain_error("eval_derivative: point must lie inside the open disc");

  // Product rule across factors; the zero factors are differentiated
  // explicitly so the result stays finite at the zeros of phi.
  const std::size_t k = spec.zeros.size();
  std::vector<Complex> factor(k), dfactor(k);
  for (std::size_t i = 0; i < k; ++i) {
    factor[i] = ipow(blaschke_factor(spec.zeros[i].alpha, z), spec.zeros[i].mult);
    dfactor[i] = static_cast<double>(spec.zeros[i].mult) *
                 ipow(blaschke_factor(spec.zeros[i].alpha, z), spec.zeros[i].mult - 1) *
                 blaschke_factor_derivative(spec.zeros[i].alpha, z);
  }
  Complex singular{1.0, 0.0}, singular_log_derivative{0.0, 0.0};
  if (!spec.atoms.empty()) {
    Complex exponent{0.0, 0.0};
    for (const auto& atom : spec.atoms) {
      Complex w = atom.location.chi();
      exponent -= atom.mass * (w + z) / (w - z);
      singular_log_derivative -= atom.mass * 2.0 * w / ((w - z) * (w - z));
    }
    singular = std::exp(exponent);
  }

  Complex phi = spec.rotation * singular;
  for (std::size_t i = 0; i < k; ++i) phi *= factor[i];

  Complex derivative{0.0, 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    Complex term = spec.rotation * singular * dfactor[i];
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) term *= factor[j];
    derivative += term;
  }
  derivative += phi * singular_log_derivative;

  DerivativeResult out;
  out.phi_prime = derivative;
  if (phi != Complex{0.0, 0.0}) out.log_derivative = z * derivative / phi;
  return out;
}

PowerSeries<Complex> taylor(const InnerFunctionSpec& spec, int order) {
  spec.validate();
  PowerSeries<Complex> result(order);
  result.c(0) = spec.rotation;

  for (const auto& zero : spec.zeros) {
    PowerSeries<Complex> factor(order);
    if (zero.alpha == Complex{0.0, 0.0}) {
      if (order >= 1) factor.c(1) = 1.0;
    } else {
      // c_a (z - a) * sum_n (conj(a) z)^n
      Complex c = blaschke_constant(zero.alpha);
      Complex conj_a = std::conj(zero.alpha);
      Complex geo{1.0, 0.0};
      PowerSeries<Complex> inv(order);
      for (int n = 0; n <= order; ++n) {
        inv.c(n) = geo;
        geo *= conj_a;
      }
      PowerSeries<Complex> numer(order);
      numer.c(0) = -c * zero.alpha;
      if (order >= 1) numer.c(1) = c;
      factor = series_mul(numer, inv);
    }
    for (int m = 0; m < zero.mult; ++m) result = series_mul(result, factor);
  }

  if (!spec.atoms.empty()) {
    // log of the singular part: -sum_j mass_j (w_j + z)/(w_j - z)
    //                         = -sum_j mass_j (1 + 2 sum_{n>=1} (z/w_j)^n).
    PowerSeries<Complex> exponent(order);
    for (const auto& atom : spec.atoms) {
      Complex w = atom.location.chi();
      exponent.c(0) -= atom.mass;
      Complex pw{1.0, 0.0};
      for (int n = 1; n <= order; ++n) {
        pw /= w;
        exponent.c(n) -= 2.0 * atom.mass * pw;
      }
    }
    result = series_mul(result, series_exp(exponent));
  }
  return result;
}

PowerSeries<Complex> iterate_taylor(const InnerFunctionSpec& spec, int count, int order) {
  if (!spec.fixes_origin())
    throw precondition_error(
        "iterate_taylor: phi(0) = 0 required; conjugate by the Moebius map at the Denjoy-Wolff "
        "point first (mobius_conjugate)");
  PowerSeries<Complex> base = taylor(spec, order);
  PowerSeries<Complex> result(order);
  result.c(0) = 0.0;
  if (order >= 1) result.c(1) = 1.0;
  for (int i = 0; i < count; ++i) result = series_compose(result, base);
  return result;
}

DenjoyWolffResult denjoy_wolff(const InnerFunctionSpec& spec, double tol, int max_iter) {
  spec.validate();
  if (spec.is_mobius())
    throw unsupported_error("denjoy_wolff: requires a non-Moebius inner function");

  DenjoyWolffResult out;
  Complex z{0.0, 0.0};
  int n = 0;
  for (; n < max_iter; ++n) {
    Complex next = eval_disk(spec, z);
    double step = std::abs(next - z);
    z = next;
    if (step < tol) break;
    if (std::abs(z) > 1.0 - 10.0 * tol && n > 64) {
      // Escaping to the boundary: no interior fixed point.
      out.interior = false;
      out.point = z / std::abs(z);
      out.iterations = n + 1;
      out.derivative_modulus = 0.0;
      return out;
    }
  }
  if (n == max_iter) {
    if (std::abs(z) > 0.9) {
      out.interior = false;
      out.point = z / std::abs(z);
      out.iterations = n;
      return out;
    }
    throw numeric_error("denjoy_wolff: fixed-point iteration failed to converge");
  }

  // Damped Newton polish on phi(z) - z = 0.
  for (int it = 0; it < 60; ++it) {
    Complex f = eval_disk(spec, z) - z;
    if (std::abs(f) < 1e-15) break;
    Complex fp = eval_derivative(spec, z).phi_prime - 1.0;
    if (std::abs(fp) < 1e-30) break;
    Complex step = f / fp;
    Complex candidate = z - step;
    double damping = 1.0;
    while ((std::abs(candidate) >= 1.0 ||
            std::abs(eval_disk(spec, candidate) - candidate) > std::abs(f)) &&
           damping > 1e-6) {
      damping *= 0.5;
      candidate = z - damping * step;
    }
    z = candidate;
  }

  out.point = z;
  out.interior = std::abs(z) < 1.0 - tol;
  out.iterations = n + 1;
  if (out.interior) out.derivative_modulus = std::abs(eval_derivative(spec, z).phi_prime);
  if (out.interior && std::abs(eval_disk(spec, z) - z) > 1e-12)
    throw numeric_error("denjoy_wolff: polished point fails |phi(d) - d| < 1e-12");
  return out;
}

MobiusConjugated::MobiusConjugated(InnerFunctionSpec spec, Complex a) : spec_(std::move(spec)), a_(a) {
  if (!(std::abs(a_) < 1.0)) throw domain_error("mobius_conjugate: |a| < 1 required");
  spec_.validate();
}

Complex MobiusConjugated::mobius(Complex z) const { return (z + a_) / (1.0 + std::conj(a_) * z); }

Complex MobiusConjugated::mobius_inverse(Complex w) const {
  return (w - a_) / (1.0 - std::conj(a_) * w);
}

Complex MobiusConjugated::eval_disk(Complex z) const {
  return mobius_inverse(innerdyn::eval_disk(spec_, mobius(z)));
}

Complex MobiusConjugated::eval_derivative(Complex z) const {
  // Chain rule with M'(z) = (1-|a|^2)/(1+conj(a) z)^2 and
  // (M^{-1})'(w) = (1-|a|^2)/(1-conj(a) w)^2.
  double one_minus = 1.0 - std::norm(a_);
  Complex mz = mobius(z);
  Complex inner = innerdyn::eval_derivative(spec_, mz).phi_prime;
  Complex w = innerdyn::eval_disk(spec_, mz);
  Complex dm = one_minus / ((1.0 + std::conj(a_) * z) * (1.0 + std::conj(a_) * z));
  Complex dminv = one_minus / ((1.0 - std::conj(a_) * w) * (1.0 - std::conj(a_) * w));
  return dminv * inner * dm;
}

PowerSeries<Complex> MobiusConjugated::taylor(int order, double radius) const {
  auto sampled = series_from_samples([this](Complex z) { return eval_disk(z); }, order, radius);
  return sampled.series;
}

MobiusConjugated mobius_conjugate(const InnerFunctionSpec& spec, Complex a) {
  return MobiusConjugated(spec, a);
}

InnerFunctionSpec doubling_spec() { return monomial_spec(2); }

InnerFunctionSpec monomial_spec(int kappa) {
  InnerFunctionSpec spec;
  spec.zeros.push_back({Complex{0.0, 0.0}, kappa});
  return spec;
}

InnerFunctionSpec blaschke_pair_spec(double a) {
  // b_{-a}(z) = -(z+a)/(1+az), so a rotation of -1 yields z (z+a)/(1+az)
  // with phi'(0) = a > 0.
  InnerFunctionSpec spec;
  spec.rotation = Complex{-1.0, 0.0};
  spec.zeros.push_back({Complex{0.0, 0.0}, 1});
  spec.zeros.push_back({Complex{-a, 0.0}, 1});
  return spec;
}

InnerFunctionSpec boole_spec() {
  InnerFunctionSpec spec;
  spec.zeros.push_back({Complex{0.0, 0.0}, 1});
  spec.atoms.push_back({CirclePoint(0.0), 1.0});
  return spec;
}

}
