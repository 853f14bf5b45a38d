#pragma once

#include <string>
#include <vector>

#include "innerdyn/inner_function.hpp"

namespace innerdyn {

// Finite atomic probability measure on the circle.
struct AtomicMeasure {
  std::vector<Atom> atoms;

  void validate() const;  // masses positive and summing to 1, locations distinct
};

AtomicMeasure measure_from_json(const std::string& text);
std::string measure_to_json(const AtomicMeasure& pi);

// Herglotz transform F(z) = sum_j mass_j (w_j + z)/(w_j - z); Re F > 0 on the
// disc and F(0) = 1.
Complex herglotz_F(const AtomicMeasure& pi, Complex z);

// The inner function phi = (F-1)/(F+1): a degree-k Blaschke product fixing
// the origin whose Clark measure at the boundary point 1 is pi.
InnerFunctionSpec inner_from_clark(const AtomicMeasure& pi);

// Runs the constructed map through the independent boundary preimage solver
// at x = 0 and returns the worst location/mass discrepancy against pi.
double clark_roundtrip_check(const AtomicMeasure& pi);

struct AngularDerivativeReport {
  bool finite = true;
  double value = 0.0;         // truncated sum at the finest threshold
  double growth_ratio = 0.0;  // finest-threshold sum over coarsest-threshold sum
};

// Truncated sum sum_y weight(y)/|chi(x) - chi(y)|^2 over preimages y of w,
// with a divergence heuristic across thresholds 1e-6 down to 1e-10.
AngularDerivativeReport angular_derivative_check(const InnerFunctionSpec& spec, CirclePoint x,
                                                 CirclePoint w);

}
