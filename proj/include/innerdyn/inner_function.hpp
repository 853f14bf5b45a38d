#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "innerdyn/power_series.hpp"

namespace innerdyn {

using Complex = std::complex<double>;

// Point of the circle T ~ [0,1), chi(t) = e^{2 pi i t}.
struct CirclePoint {
  double t = 0.0;

  CirclePoint() = default;
  explicit CirclePoint(double value) : t(reduce(value)) {}

  static double reduce(double x) {
    double r = x - std::floor(x);
    return r < 1.0 ? r : 0.0;
  }

  Complex chi() const;
};

// Shortest distance on the circle.
double circular_distance(double a, double b);

struct Zero {
  Complex alpha;
  int mult = 1;
};

struct Atom {
  CirclePoint location;
  double mass = 0.0;
};

// phi = rotation * (Blaschke part over zeros) * (singular part over atoms).
struct InnerFunctionSpec {
  Complex rotation{1.0, 0.0};
  std::vector<Zero> zeros;
  std::vector<Atom> atoms;

  bool is_mobius() const;
  bool fixes_origin() const;
  int vanishing_order() const;  // multiplicity of 0 as a zero of phi
  double atom_total_mass() const;

  // Throws precondition_error naming the violated field if the parameters do
  // not describe a non-constant inner function.
  void validate() const;
};

struct DenjoyWolffResult {
  Complex point{0.0, 0.0};
  bool interior = true;
  double derivative_modulus = 0.0;
  int iterations = 0;
};

Complex eval_disk(const InnerFunctionSpec& spec, Complex z);

struct DerivativeResult {
  Complex phi_prime;
  std::optional<Complex> log_derivative;  // z phi'(z)/phi(z); empty when phi(z) = 0
};

DerivativeResult eval_derivative(const InnerFunctionSpec& spec, Complex z);

PowerSeries<Complex> taylor(const InnerFunctionSpec& spec, int order);

PowerSeries<Complex> iterate_taylor(const InnerFunctionSpec& spec, int count, int order);

DenjoyWolffResult denjoy_wolff(const InnerFunctionSpec& spec, double tol = 1e-14,
                               int max_iter = 1000000);

// g = M_a^{-1} o phi o M_a with M_a(z) = (z+a)/(1 + conj(a) z). The wrapper
// is evaluable but deliberately not an InnerFunctionSpec: conjugation does
// not preserve the zero/atom parametrization in closed form.
class MobiusConjugated {
 public:
  MobiusConjugated(InnerFunctionSpec spec, Complex a);

  Complex eval_disk(Complex z) const;
  Complex eval_derivative(Complex z) const;
  // Taylor coefficients by circle sampling at the given radius (the
  // conjugated map has no coefficient recurrence of its own).
  PowerSeries<Complex> taylor(int order, double radius = 0.75) const;

  Complex mobius(Complex z) const;          // M_a
  Complex mobius_inverse(Complex w) const;  // M_a^{-1}

 private:
  InnerFunctionSpec spec_;
  Complex a_;
};

MobiusConjugated mobius_conjugate(const InnerFunctionSpec& spec, Complex a);

// JSON spec exchange format:
//   {"rotation":{"re":1.0,"im":0.0},
//    "zeros":[{"re":0.0,"im":0.0,"mult":1}],
//    "atoms":[{"t":0.0,"mass":1.0}]}
// Violations are rejected with messages naming the offending line of the
// source text.
InnerFunctionSpec spec_from_json(const std::string& text);
std::string spec_to_json(const InnerFunctionSpec& spec);

// Ready-made study maps used across the test-suite and documentation.
InnerFunctionSpec doubling_spec();              // phi(z) = z^2
InnerFunctionSpec monomial_spec(int kappa);     // phi(z) = z^kappa
InnerFunctionSpec blaschke_pair_spec(double a); // phi(z) = z (z+a)/(1+a z)
InnerFunctionSpec boole_spec();                 // phi(z) = z exp(-(1+z)/(1-z))

}
