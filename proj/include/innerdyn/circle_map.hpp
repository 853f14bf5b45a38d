#pragma once

#include <cstdint>
#include <vector>

#include "innerdyn/inner_function.hpp"

namespace innerdyn {

// The boundary map tau with chi(tau x) = phi(chi(x)), as a concrete circle
// map with closed-form value and derivatives. Branch cuts sit at the atom
// locations; between consecutive atoms the monotone lift runs from -inf to
// +inf.
class Restriction {
 public:
  explicit Restriction(InnerFunctionSpec spec);

  const InnerFunctionSpec& spec() const { return spec_; }
  const std::vector<CirclePoint>& branch_cuts() const { return cuts_; }

  // Continuous lift T(theta); value = frac(T), derivatives in closed form.
  double lift(double theta) const;
  double derivative(double theta) const;
  double second_derivative(double theta) const;

  // Lift and derivatives of the Blaschke-part-only map (atoms dropped).
  double blaschke_lift(double theta) const;
  double blaschke_derivative(double theta) const;
  double blaschke_second_derivative(double theta) const;

  int degree() const;  // total zero multiplicity = winding number of tau

 private:
  InnerFunctionSpec spec_;
  std::vector<CirclePoint> cuts_;
};

struct RestrictionValue {
  CirclePoint value;
  double d1;
  double d2;
};

RestrictionValue evaluate_restriction(const Restriction& tau, CirclePoint theta);

struct ClarkAtoms {
  CirclePoint base;
  std::vector<CirclePoint> points;
  std::vector<double> weights;  // weight(y) = 1/tau'(y)
  double truncation_threshold = 0.0;
  double captured_mass = 0.0;
  double total_mass = 0.0;  // exact total = p_{phi(0)}(base); 1 when phi(0)=0
};

ClarkAtoms preimages(const Restriction& tau, CirclePoint x, double weight_threshold);

struct AdlerReport {
  double min_tau_prime = 0.0;        // eta: inf of tau' over the grid
  double argmin_theta = 0.0;         // grid location of the minimum
  int expansion_power = 0;           // least d with min (tau^d)' > 1
  double expansion_beta = 0.0;       // min (tau^d)' at that d
  double sup_delta_tau = 0.0;        // sup |tau''|/tau'^2 over the grid
  double analytic_bound = 0.0;       // sup_grid(Delta of Blaschke part) + 2 pi sum_j 1/mass_j
  double lower_bound_tau_prime = 0.0;// sum_zeros m (1-|a|)/(1+|a|) + (total mass)/2
};

AdlerReport adler_report(const Restriction& tau, int grid, int d_max);

std::vector<CirclePoint> sample_invariant(const DenjoyWolffResult& dw, std::uint64_t seed, int n);

struct OrbitResult {
  std::vector<CirclePoint> points;            // theta_0 .. tau^n theta_0
  std::vector<int> perturbation_events;       // steps where an atom hit was nudged
};

OrbitResult orbit(const Restriction& tau, CirclePoint theta0, int n);

}
