#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "innerdyn/circle_map.hpp"
#include "innerdyn/clark.hpp"
#include "innerdyn/errors.hpp"
#include "innerdyn/inner_function.hpp"
#include "innerdyn/parallel.hpp"
#include "innerdyn/report.hpp"
#include "innerdyn/transfer.hpp"
#include "innerdyn/twisted.hpp"
#include "innerdyn/version.hpp"

namespace {

using innerdyn::Complex;
using innerdyn::Json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw innerdyn::precondition_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw innerdyn::precondition_error("cannot write file: " + out_path);
  out << content;
}

Json complex_json(Complex z) {
  return Json{{"re", z.real()}, {"im", z.imag()}};
}

Json make_meta(const std::string& command, const std::string& hash, Json params,
               std::optional<std::uint64_t> seed) {
  Json meta;
  meta["command"] = command;
  meta["library_version"] = innerdyn::library_version;
  meta["spec_hash"] = hash;
  meta["params"] = std::move(params);
  if (seed) {
    meta["seed"] = *seed;
  } else {
    meta["seed"] = nullptr;
  }
  return meta;
}

std::string csv_meta(const std::string& command, const std::string& hash,
                     const std::vector<std::pair<std::string, std::string>>& params,
                     std::optional<std::uint64_t> seed) {
  std::ostringstream out;
  out << "# command: " << command << "\n";
  out << "# library_version: " << innerdyn::library_version << "\n";
  out << "# spec_hash: " << hash << "\n";
  for (const auto& [key, value] : params) out << "# " << key << ": " << value << "\n";
  out << "# seed: " << (seed ? std::to_string(*seed) : std::string("none")) << "\n";
  return out.str();
}

innerdyn::Observable parse_observable(const std::string& name) {
  if (name == "cos") return innerdyn::cosine_observable();
  if (name == "sin") {
    innerdyn::Observable psi;
    psi.fourier = innerdyn::FourierVector(1);
    psi.fourier.at(1) = Complex(0.0, -0.5);
    psi.fourier.at(-1) = Complex(0.0, 0.5);
    return psi;
  }
  // Anything else is a path to {"B": 4.0, "coeffs": [{"n":1,"re":0.5,"im":0.0}, ...]}.
  Json j;
  try {
    j = Json::parse(read_file(name));
  } catch (const nlohmann::json::parse_error& e) {
    throw innerdyn::precondition_error(std::string("observable json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array()) {
    throw innerdyn::precondition_error("observable json: expected {\"B\":..., \"coeffs\":[...]}");
  }
  int max_n = 0;
  for (const auto& entry : j["coeffs"]) {
    if (!entry.contains("n") || !entry["n"].is_number_integer()) {
      throw innerdyn::precondition_error("observable json: every coefficient needs integer n");
    }
    max_n = std::max(max_n, std::abs(entry["n"].get<int>()));
  }
  innerdyn::Observable psi;
  psi.fourier = innerdyn::FourierVector(max_n);
  for (const auto& entry : j["coeffs"]) {
    const int n = entry["n"].get<int>();
    psi.fourier.at(n) = Complex(entry.value("re", 0.0), entry.value("im", 0.0));
  }
  if (j.contains("B")) psi.analytic_radius_hint = j["B"].get<double>();
  psi.validate();
  return psi;
}

struct Options {
  std::string spec_path;
  std::string measure_path;
  std::string spec_out_path;
  std::string out_path;
  std::string psi_name = "cos";
  int threads = 0;
  int M = 64;
  int N = 8;
  int n = 1000;
  int trials = 100000;
  int grid = 4096;
  int d_max = 12;
  double b = 2.0;
  // Subcommands whose defaults differ get their own fields: CLI11 assigns a
  // default_val through the bound variable at setup time, so a shared field
  // would end up holding whichever default was registered last.
  double gap_b = 1.5;
  int gap_M = 96;
  double radius_b = 1.2;
  int radius_M = 96;
  int llt_n = 500;
  int llt_trials = 1000000;
  double h = 1e-3;
  double t = 0.0;
  double t_min = 0.05, t_max = 5.0, t_step = 0.05;
  double theta0 = 0.0;
  double x = 0.0;
  double z_re = 0.0, z_im = 0.0;
  double threshold = 1e-8;
  double interval = 0.5;
  std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamics of inner functions: transfer operators, Clark measures, limit theorems"};
  app.require_subcommand(1);

  Options opt;
  std::optional<std::uint64_t> used_seed;

  auto add_common = [&](CLI::App* sub, bool needs_spec = true) {
    if (needs_spec) sub->add_option("--spec", opt.spec_path, "inner function spec JSON")->required();
    sub->add_option("--out", opt.out_path, "output path (default: stdout)");
    sub->add_option("--threads", opt.threads, "worker threads (default: all cores)");
  };

  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate phi and phi' at an interior point");
  add_common(cmd_eval);
  cmd_eval->add_option("--re", opt.z_re, "Re z");
  cmd_eval->add_option("--im", opt.z_im, "Im z");

  CLI::App* cmd_orbit = app.add_subcommand("orbit", "boundary orbit of the restriction");
  add_common(cmd_orbit);
  cmd_orbit->add_option("--theta0", opt.theta0, "starting point in [0,1)")->required();
  cmd_orbit->add_option("--n", opt.n, "number of steps");

  CLI::App* cmd_dw = app.add_subcommand("dw", "Denjoy-Wolff point");
  add_common(cmd_dw);

  CLI::App* cmd_clark = app.add_subcommand("clark", "preimage (Clark) measure at a boundary point");
  add_common(cmd_clark);
  cmd_clark->add_option("--x", opt.x, "boundary point in [0,1)")->required();
  cmd_clark->add_option("--threshold", opt.threshold, "smallest reported weight");

  CLI::App* cmd_matrix = app.add_subcommand("matrix", "transfer matrix CSV dump");
  add_common(cmd_matrix);
  cmd_matrix->add_option("--M", opt.M, "truncation order");

  CLI::App* cmd_gap = app.add_subcommand("gap", "weighted operator norms of powers");
  add_common(cmd_gap);
  cmd_gap->add_option("--b", opt.gap_b, "weight base")->capture_default_str();
  cmd_gap->add_option("--N", opt.N, "largest power");
  cmd_gap->add_option("--M", opt.gap_M, "truncation order")->capture_default_str();

  CLI::App* cmd_radius = app.add_subcommand("radius", "essential spectral radius estimate");
  add_common(cmd_radius);
  cmd_radius->add_option("--b", opt.radius_b, "weight base")->capture_default_str();
  cmd_radius->add_option("--M", opt.radius_M, "truncation order")->capture_default_str();

  CLI::App* cmd_twist = app.add_subcommand("twist", "leading eigenvalue of the twisted operator");
  add_common(cmd_twist);
  cmd_twist->add_option("--psi", opt.psi_name, "observable: cos, sin, or coefficient JSON path");
  cmd_twist->add_option("--t", opt.t, "twist parameter")->required();
  cmd_twist->add_option("--M", opt.M, "truncation order");
  cmd_twist->add_option("--b", opt.b, "weight base");

  CLI::App* cmd_clt = app.add_subcommand("clt", "variance and central limit verification");
  add_common(cmd_clt);
  cmd_clt->add_option("--psi", opt.psi_name, "observable");
  cmd_clt->add_option("--n", opt.n, "orbit length");
  cmd_clt->add_option("--trials", opt.trials, "Monte Carlo trials");
  cmd_clt->add_option("--seed", opt.seed, "RNG seed")->required();

  CLI::App* cmd_llt = app.add_subcommand("llt", "local limit verification (integrated form)");
  add_common(cmd_llt);
  cmd_llt->add_option("--psi", opt.psi_name, "observable");
  cmd_llt->add_option("--n", opt.llt_n, "orbit length")->capture_default_str();
  cmd_llt->add_option("--trials", opt.llt_trials, "Monte Carlo trials")->capture_default_str();
  cmd_llt->add_option("--interval", opt.interval, "target interval length");
  cmd_llt->add_option("--seed", opt.seed, "RNG seed")->required();

  CLI::App* cmd_scan = app.add_subcommand("scan", "aperiodicity scan of |lambda(t)|");
  add_common(cmd_scan);
  cmd_scan->add_option("--psi", opt.psi_name, "observable");
  cmd_scan->add_option("--t-min", opt.t_min, "grid start");
  cmd_scan->add_option("--t-max", opt.t_max, "grid end");
  cmd_scan->add_option("--t-step", opt.t_step, "grid step");
  cmd_scan->add_option("--M", opt.M, "truncation order");
  cmd_scan->add_option("--b", opt.b, "weight base");

  CLI::App* cmd_construct = app.add_subcommand("construct", "inner function from a Clark measure");
  add_common(cmd_construct, false);
  cmd_construct->add_option("--measure", opt.measure_path, "atomic measure JSON")->required();
  cmd_construct->add_option("--spec-out", opt.spec_out_path,
                            "also write the bare spec JSON, reusable as --spec");

  CLI::App* cmd_adler = app.add_subcommand("adler", "expansion and distortion bounds");
  add_common(cmd_adler);
  cmd_adler->add_option("--grid", opt.grid, "grid size");
  cmd_adler->add_option("--dmax", opt.d_max, "largest iterate tried for expansivity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt.threads > 0) innerdyn::thread_override() = opt.threads;

    std::string spec_text, hash;
    innerdyn::InnerFunctionSpec spec;
    if (!opt.spec_path.empty()) {
      spec_text = read_file(opt.spec_path);
      hash = innerdyn::hex64(innerdyn::fnv1a64(spec_text));
      spec = innerdyn::spec_from_json(spec_text);
    }

    std::string output;

    if (cmd_eval->parsed()) {
      const Complex z(opt.z_re, opt.z_im);
      const Complex value = innerdyn::eval_disk(spec, z);
      const innerdyn::DerivativeResult d = innerdyn::eval_derivative(spec, z);
      Json r;
      r["meta"] = make_meta("eval", hash, Json{{"re", opt.z_re}, {"im", opt.z_im}}, {});
      r["z"] = complex_json(z);
      r["phi"] = complex_json(value);
      r["phi_prime"] = complex_json(d.phi_prime);
      r["log_derivative"] = d.log_derivative ? complex_json(*d.log_derivative) : Json(nullptr);
      output = innerdyn::dump_json(r);
    } else if (cmd_orbit->parsed()) {
      const innerdyn::Restriction tau(spec);
      const innerdyn::OrbitResult orb =
          innerdyn::orbit(tau, innerdyn::CirclePoint(opt.theta0), opt.n);
      std::ostringstream csv;
      csv << csv_meta("orbit", hash,
                      {{"theta0", innerdyn::format_double(opt.theta0)},
                       {"n", std::to_string(opt.n)}},
                      {});
      csv << "# perturbation_steps:";
      for (int step : orb.perturbation_events) csv << " " << step;
      csv << "\n" << "j,theta\n";
      for (std::size_t j = 0; j < orb.points.size(); ++j) {
        csv << j << "," << innerdyn::format_double(orb.points[j].t) << "\n";
      }
      output = csv.str();
    } else if (cmd_dw->parsed()) {
      const innerdyn::DenjoyWolffResult dw = innerdyn::denjoy_wolff(spec);
      Json r;
      r["meta"] = make_meta("dw", hash, Json::object(), {});
      r["point"] = complex_json(dw.point);
      r["interior"] = dw.interior;
      r["derivative_modulus"] = dw.derivative_modulus;
      r["iterations"] = dw.iterations;
      output = innerdyn::dump_json(r);
    } else if (cmd_clark->parsed()) {
      const innerdyn::Restriction tau(spec);
      const innerdyn::ClarkAtoms nu =
          innerdyn::preimages(tau, innerdyn::CirclePoint(opt.x), opt.threshold);
      Json atoms = Json::array();
      for (std::size_t i = 0; i < nu.points.size(); ++i) {
        atoms.push_back(Json{{"t", nu.points[i].t}, {"weight", nu.weights[i]}});
      }
      Json r;
      r["meta"] = make_meta("clark", hash,
                            Json{{"x", opt.x}, {"threshold", opt.threshold}}, {});
      r["total_mass"] = nu.total_mass;
      r["captured_mass"] = nu.captured_mass;
      r["atoms"] = std::move(atoms);
      output = innerdyn::dump_json(r);
    } else if (cmd_matrix->parsed()) {
      const innerdyn::TransferMatrix T = innerdyn::build_transfer_matrix(spec, opt.M);
      std::ostringstream csv;
      csv << csv_meta("matrix", hash, {{"M", std::to_string(opt.M)}}, {});
      csv << "# kappa: " << T.kappa << "\n";
      csv << "# truncation_mass:";
      for (double m : T.truncation_mass) csv << " " << innerdyn::format_double(m);
      csv << "\n" << "k,l,re,im\n";
      for (int l = 1; l <= T.M; ++l) {
        for (int k = 1; k <= T.M; ++k) {
          const Complex a = T.a(k, l);
          csv << k << "," << l << "," << innerdyn::format_double(a.real()) << ","
              << innerdyn::format_double(a.imag()) << "\n";
        }
      }
      output = csv.str();
    } else if (cmd_gap->parsed()) {
      const innerdyn::SpectralReport rep = innerdyn::gap_report(spec, opt.gap_b, opt.N, opt.gap_M);
      Json entries = Json::array();
      for (const innerdyn::GapEntry& e : rep.entries) {
        entries.push_back(Json{{"N", e.N},
                               {"measured_norm", e.measured_norm},
                               {"bicycle_bound", e.bicycle_bound}});
      }
      Json r;
      r["meta"] = make_meta("gap", hash,
                            Json{{"b", opt.gap_b}, {"N", opt.N}, {"M", opt.gap_M}}, {});
      r["entries"] = std::move(entries);
      r["wheelchair_fit_rho"] = rep.wheelchair_fit_rho;
      r["second_eigenvalue_modulus"] = rep.second_eigenvalue_modulus;
      output = innerdyn::dump_json(r);
    } else if (cmd_radius->parsed()) {
      const innerdyn::EssentialRadiusReport rep =
          innerdyn::essential_radius_estimate(spec, opt.radius_b, opt.radius_M);
      Json r;
      r["meta"] = make_meta("radius", hash, Json{{"b", opt.radius_b}, {"M", opt.radius_M}}, {});
      r["estimate"] = rep.estimate;
      r["estimate_half"] = rep.estimate_half;
      r["phi_prime_modulus"] = rep.phi_prime_modulus;
      output = innerdyn::dump_json(r);
    } else if (cmd_twist->parsed()) {
      const innerdyn::Observable psi = parse_observable(opt.psi_name);
      const innerdyn::TransferMatrix T = innerdyn::build_transfer_matrix(spec, opt.M);
      const innerdyn::TwistedMatrix P =
          innerdyn::build_twisted(T, psi, Complex(0.0, opt.t), opt.b);
      const innerdyn::LeadingEigen eig = innerdyn::leading_eigen(P);
      Json r;
      r["meta"] = make_meta("twist", hash,
                            Json{{"psi", opt.psi_name}, {"t", opt.t}, {"M", opt.M}, {"b", opt.b}},
                            {});
      r["lambda"] = complex_json(eig.lambda);
      r["lambda_abs"] = std::abs(eig.lambda);
      r["gap_ratio"] = eig.gap_ratio;
      output = innerdyn::dump_json(r);
    } else if (cmd_clt->parsed()) {
      used_seed = opt.seed;
      const innerdyn::Observable psi = parse_observable(opt.psi_name);
      const double s2_eigen = innerdyn::sigma2_from_eigen(spec, psi);
      const innerdyn::MonteCarloSigma2 s2_mc =
          innerdyn::sigma2_monte_carlo(spec, psi, opt.n, opt.trials, opt.seed);
      const double ks = innerdyn::clt_check(spec, psi, opt.n, opt.trials, opt.seed);
      Json r;
      r["meta"] = make_meta("clt", hash,
                            Json{{"psi", opt.psi_name}, {"n", opt.n}, {"trials", opt.trials}},
                            used_seed);
      r["sigma2_eigen"] = s2_eigen;
      r["sigma2_mc"] = s2_mc.sigma2;
      r["sigma2_mc_standard_error"] = s2_mc.standard_error;
      r["ks_distance"] = ks;
      output = innerdyn::dump_json(r);
    } else if (cmd_llt->parsed()) {
      used_seed = opt.seed;
      const innerdyn::Observable psi = parse_observable(opt.psi_name);
      const innerdyn::LltReport rep =
          innerdyn::llt_check(spec, psi, opt.llt_n, opt.llt_trials, opt.interval, opt.seed);
      Json entries = Json::array();
      for (const innerdyn::LltEntry& e : rep.entries) {
        entries.push_back(Json{{"kappa", e.kappa},
                               {"estimate", e.estimate},
                               {"target", e.target},
                               {"relative_error", e.relative_error},
                               {"hits", e.hits}});
      }
      Json r;
      r["meta"] = make_meta("llt", hash,
                            Json{{"psi", opt.psi_name},
                                 {"n", opt.llt_n},
                                 {"trials", opt.llt_trials},
                                 {"interval", opt.interval}},
                            used_seed);
      r["sigma2"] = rep.sigma2;
      r["entries"] = std::move(entries);
      output = innerdyn::dump_json(r);
    } else if (cmd_scan->parsed()) {
      const innerdyn::Observable psi = parse_observable(opt.psi_name);
      std::vector<double> grid;
      for (double t = opt.t_min; t <= opt.t_max + 1e-12; t += opt.t_step) grid.push_back(t);
      const innerdyn::AperiodicityScan scan =
          innerdyn::aperiodicity_scan(spec, psi, grid, opt.M, opt.b);
      std::ostringstream csv;
      csv << csv_meta("scan", hash,
                      {{"psi", opt.psi_name},
                       {"t_min", innerdyn::format_double(opt.t_min)},
                       {"t_max", innerdyn::format_double(opt.t_max)},
                       {"t_step", innerdyn::format_double(opt.t_step)},
                       {"M", std::to_string(opt.M)},
                       {"b", innerdyn::format_double(opt.b)}},
                      {});
      csv << "# aperiodicity_max: " << innerdyn::format_double(scan.max_modulus) << "\n";
      csv << "t,re,im,abs\n";
      for (const innerdyn::ScanRow& row : scan.rows) {
        csv << innerdyn::format_double(row.t) << "," << innerdyn::format_double(row.lambda.real())
            << "," << innerdyn::format_double(row.lambda.imag()) << ","
            << innerdyn::format_double(std::abs(row.lambda)) << "\n";
      }
      output = csv.str();
    } else if (cmd_construct->parsed()) {
      const std::string measure_text = read_file(opt.measure_path);
      hash = innerdyn::hex64(innerdyn::fnv1a64(measure_text));
      const innerdyn::AtomicMeasure pi = innerdyn::measure_from_json(measure_text);
      const innerdyn::InnerFunctionSpec built = innerdyn::inner_from_clark(pi);
      const double err = innerdyn::clark_roundtrip_check(pi);
      Json r;
      r["meta"] = make_meta("construct", hash, Json::object(), {});
      r["spec"] = Json::parse(innerdyn::spec_to_json(built));
      r["roundtrip_max_error"] = err;
      output = innerdyn::dump_json(r);
      if (!opt.spec_out_path.empty()) {
        std::ofstream spec_out(opt.spec_out_path, std::ios::binary);
        if (!spec_out) {
          throw innerdyn::precondition_error("cannot write file: " + opt.spec_out_path);
        }
        spec_out << innerdyn::spec_to_json(built);
      }
    } else if (cmd_adler->parsed()) {
      const innerdyn::Restriction tau(spec);
      const innerdyn::AdlerReport rep = innerdyn::adler_report(tau, opt.grid, opt.d_max);
      Json r;
      r["meta"] = make_meta("adler", hash,
                            Json{{"grid", opt.grid}, {"d_max", opt.d_max}}, {});
      r["min_tau_prime"] = rep.min_tau_prime;
      r["argmin_theta"] = rep.argmin_theta;
      r["expansion_power"] = rep.expansion_power;
      r["expansion_beta"] = rep.expansion_beta;
      r["sup_delta_tau"] = rep.sup_delta_tau;
      r["analytic_bound"] = rep.analytic_bound;
      r["lower_bound_tau_prime"] = rep.lower_bound_tau_prime;
      output = innerdyn::dump_json(r);
    }

    write_output(opt.out_path, output);
    return 0;
  } catch (const innerdyn::precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const innerdyn::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}
