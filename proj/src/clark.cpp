#include "innerdyn/clark.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "innerdyn/circle_map.hpp"
#include "innerdyn/errors.hpp"

namespace innerdyn {

namespace {

// Coefficients (ascending) of the product prod_i (w_i - z) over a subset.
std::vector<Complex> linear_product(const std::vector<Complex>& w, std::size_t skip) {
  std::vector<Complex> c{1.0};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == skip) continue;
    std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] += w[i] * c[j];
      next[j + 1] -= c[j];
    }
    c = std::move(next);
  }
  return c;
}

Complex eval_poly(const std::vector<Complex>& c, Complex z) {
  Complex v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
  return v;
}

std::vector<Complex> companion_roots(std::vector<Complex> c) {
  while (!c.empty() && std::abs(c.back()) < 1e-14) c.pop_back();
  if (c.size() <= 1) return {};
  const int d = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) C(i, d - 1) = -c[i] / c[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(C, false);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("inner_from_clark: companion eigenvalue computation failed");
  }
  std::vector<Complex> roots(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
  return roots;
}

double preimage_sum(const Restriction& tau, CirclePoint x, CirclePoint w, double threshold) {
  const ClarkAtoms nu = preimages(tau, w, threshold);
  const Complex cx = x.chi();
  double s = 0.0;
  for (std::size_t i = 0; i < nu.points.size(); ++i) {
    s += nu.weights[i] / std::norm(cx - nu.points[i].chi());
  }
  return s;
}

}  // namespace

void AtomicMeasure::validate() const {
  if (atoms.empty()) throw precondition_error("AtomicMeasure: at least one atom required");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.mass > 0.0)) throw precondition_error("AtomicMeasure: masses must be positive");
    total += a.mass;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw precondition_error("AtomicMeasure: masses must sum to 1");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (atoms[i].location.t == atoms[j].location.t) {
        throw precondition_error("AtomicMeasure: atom locations must be distinct");
      }
    }
  }
}

AtomicMeasure measure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw precondition_error(std::string("measure json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) {
    throw precondition_error("measure json: expected an object with an \"atoms\" array");
  }
  AtomicMeasure pi;
  for (const auto& entry : j["atoms"]) {
    if (!entry.is_object() || !entry.contains("t") || !entry.contains("mass") ||
        !entry["t"].is_number() || !entry["mass"].is_number()) {
      throw precondition_error("measure json: each atom needs numeric \"t\" and \"mass\"");
    }
    pi.atoms.push_back({CirclePoint(entry["t"].get<double>()), entry["mass"].get<double>()});
  }
  pi.validate();
  return pi;
}

std::string measure_to_json(const AtomicMeasure& pi) {
  nlohmann::ordered_json j;
  j["atoms"] = nlohmann::ordered_json::array();
  for (const Atom& a : pi.atoms) {
    j["atoms"].push_back({{"t", a.location.t}, {"mass", a.mass}});
  }
  return j.dump(2) + "\n";
}

Complex herglotz_F(const AtomicMeasure& pi, Complex z) {
  pi.validate();
  if (std::abs(z) >= 1.0) throw precondition_error("herglotz_F: point must be in the open disc");
  Complex F = 0.0;
  for (const Atom& a : pi.atoms) {
    const Complex w = a.location.chi();
    F += a.mass * (w + z) / (w - z);
  }
  return F;
}

InnerFunctionSpec inner_from_clark(const AtomicMeasure& pi) {
  pi.validate();
  const std::size_t k = pi.atoms.size();
  if (k < 2) {
    throw precondition_error("inner_from_clark: a single atom at t gives F = (chi(t)+z)/(chi(t)-z) "
                             "and phi(z) = z/chi(t), a Mobius rotation (phi = z for t = 0); "
                             "at least two atoms are required");
  }

  std::vector<Complex> w(k);
  for (std::size_t j = 0; j < k; ++j) w[j] = pi.atoms[j].location.chi();

  // phi = (F-1)/(F+1) = z A(z)/B(z) with
  //   A = sum_j m_j prod_{i != j} (w_i - z),  B = sum_j m_j w_j prod_{i != j} (w_i - z).
  std::vector<Complex> A(k, Complex(0.0, 0.0)), B(k, Complex(0.0, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<Complex> p = linear_product(w, j);
    for (std::size_t i = 0; i < p.size(); ++i) {
      A[i] += pi.atoms[j].mass * p[i];
      B[i] += pi.atoms[j].mass * w[j] * p[i];
    }
  }

  std::vector<Complex> roots = companion_roots(A);
  for (const Complex& r : roots) {
    if (std::abs(r) >= 1.0) {
      throw conditioning_error("inner_from_clark: numerator root left the open disc "
                               "(ill-conditioned atom configuration)");
    }
  }

  // Cluster nearby roots into multiplicities; a cluster at the origin merges
  // with the guaranteed zero of phi there.
  InnerFunctionSpec spec;
  std::vector<Zero> zeros{{Complex(0.0, 0.0), 1}};
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  for (const Complex& r : roots) {
    bool merged = false;
    for (Zero& z : zeros) {
      if (std::abs(r - z.alpha) < 1e-7) {
        z.mult += 1;
        merged = true;
        break;
      }
    }
    if (!merged) zeros.push_back({r, 1});
  }
  spec.zeros = zeros;

  // Rotation constant from a reference point where neither side degenerates,
  // snapped to the unit circle.
  const Complex candidates[] = {{0.3, 0.17}, {-0.41, 0.13}, {0.11, -0.47}, {0.52, 0.08}};
  bool snapped = false;
  for (const Complex& zs : candidates) {
    const Complex rational = zs * eval_poly(A, zs) / eval_poly(B, zs);
    spec.rotation = Complex(1.0, 0.0);
    const Complex blaschke = eval_disk(spec, zs);
    if (std::abs(rational) < 1e-8 || std::abs(blaschke) < 1e-8) continue;
    const Complex lambda = rational / blaschke;
    if (std::abs(std::abs(lambda) - 1.0) > 1e-6) {
      throw conditioning_error("inner_from_clark: recovered rotation is far from unimodular "
                               "(root clustering failed)");
    }
    spec.rotation = lambda / std::abs(lambda);
    snapped = true;
    break;
  }
  if (!snapped) {
    throw conditioning_error("inner_from_clark: no usable reference point for the rotation");
  }
  spec.validate();

  for (int g = 0; g < 1024; ++g) {
    const Complex chi = CirclePoint(double(g) / 1024.0).chi();
    const double mod = std::abs(chi * eval_poly(A, chi) / eval_poly(B, chi));
    if (std::abs(mod - 1.0) > 1e-10) {
      throw conditioning_error("inner_from_clark: (F-1)/(F+1) is not unimodular on the "
                               "boundary grid; the measure is too ill-conditioned");
    }
  }
  return spec;
}

double clark_roundtrip_check(const AtomicMeasure& pi) {
  const InnerFunctionSpec spec = inner_from_clark(pi);
  const Restriction tau(spec);
  const ClarkAtoms nu = preimages(tau, CirclePoint(0.0), 1e-10);
  if (nu.points.size() != pi.atoms.size()) {
    throw numeric_error("clark_roundtrip_check: preimage count " +
                        std::to_string(nu.points.size()) + " does not match atom count " +
                        std::to_string(pi.atoms.size()));
  }
  double max_error = 0.0;
  for (const Atom& a : pi.atoms) {
    double best_dist = 2.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < nu.points.size(); ++i) {
      const double d = circular_distance(a.location.t, nu.points[i].t);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    max_error = std::max(max_error, best_dist);
    max_error = std::max(max_error, std::abs(nu.weights[best] - a.mass));
  }
  return max_error;
}

AngularDerivativeReport angular_derivative_check(const InnerFunctionSpec& spec, CirclePoint x,
                                                 CirclePoint w) {
  if (circular_distance(x.t, w.t) < 1e-15) {
    throw domain_error("angular_derivative_check: x and w must be distinct boundary points");
  }
  const Restriction tau(spec);
  AngularDerivativeReport report;
  const double coarse = preimage_sum(tau, x, w, 1e-6);
  report.value = preimage_sum(tau, x, w, 1e-10);
  report.growth_ratio = coarse > 0.0 ? report.value / coarse : 1.0;
  report.finite = report.growth_ratio <= 10.0;
  return report;
}

}  // namespace innerdyn
