#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("inner-dyn-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string binary() {
  if (const char* bin = std::getenv("INNER_DYN_BIN")) return bin;
#ifdef INNER_DYN_BIN
  return INNER_DYN_BIN;
#else
  FAIL("INNER_DYN_BIN must point at the inner-dyn binary");
  return {};
#endif
}

std::string source_dir() {
  if (const char* dir = std::getenv("INNER_DYN_SOURCE_DIR")) return dir;
#ifdef INNER_DYN_SOURCE_DIR
  return INNER_DYN_SOURCE_DIR;
#else
  FAIL("INNER_DYN_SOURCE_DIR must point at the repository root");
  return {};
#endif
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch() / ("stdout." + std::to_string(counter));
  const fs::path err = scratch() / ("stderr." + std::to_string(counter));
  ++counter;
  const std::string cmd =
      binary() + " " + args + " > " + out.string() + " 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

const fs::path& fixture(const std::string& name, const std::string& text) {
  static std::vector<std::pair<std::string, fs::path>> cache;
  for (const auto& [key, path] : cache) {
    if (key == name) return path;
  }
  const fs::path path = scratch() / name;
  write_file(path, text);
  cache.emplace_back(name, path);
  return cache.back().second;
}

std::string doubling_file() {
  return fixture("doubling.json",
                 "{\"rotation\": {\"re\": 1, \"im\": 0},"
                 " \"zeros\": [{\"re\": 0, \"im\": 0, \"mult\": 2}], \"atoms\": []}")
      .string();
}

std::string boole_file() {
  return fixture("boole.json",
                 "{\"rotation\": {\"re\": 1, \"im\": 0},"
                 " \"zeros\": [{\"re\": 0, \"im\": 0, \"mult\": 1}],"
                 " \"atoms\": [{\"t\": 0, \"mass\": 1}]}")
      .string();
}

std::string blaschke_file() {
  return fixture("blaschke.json",
                 "{\"rotation\": {\"re\": -1, \"im\": 0},"
                 " \"zeros\": [{\"re\": 0, \"im\": 0, \"mult\": 1},"
                 "             {\"re\": -0.5, \"im\": 0, \"mult\": 1}], \"atoms\": []}")
      .string();
}

std::string mobius_file() {
  return fixture("mobius.json",
                 "{\"rotation\": {\"re\": 1, \"im\": 0},"
                 " \"zeros\": [{\"re\": 0, \"im\": 0, \"mult\": 1}], \"atoms\": []}")
      .string();
}

std::string measure_file() {
  return fixture("measure.json",
                 "{\"atoms\": [{\"t\": 0.25, \"mass\": 0.5}, {\"t\": 0.75, \"mass\": 0.5}]}")
      .string();
}

std::string psi_file() {
  return fixture("psi.json",
                 "{\"B\": 4.0, \"coeffs\": [{\"n\": 1, \"re\": 0.5, \"im\": 0},"
                 " {\"n\": -1, \"re\": 0.5, \"im\": 0}]}")
      .string();
}

// Just enough of json-schema to enforce the documented output contracts:
// type (string or list), required, properties, additionalProperties: false,
// items, enum.
void collect_schema_errors(const json& schema, const json& value, const std::string& path,
                           std::string& errors) {
  if (schema.contains("type")) {
    const auto matches = [&](const std::string& t) {
      if (t == "object") return value.is_object();
      if (t == "array") return value.is_array();
      if (t == "string") return value.is_string();
      if (t == "number") return value.is_number();
      if (t == "integer") return value.is_number_integer();
      if (t == "boolean") return value.is_boolean();
      if (t == "null") return value.is_null();
      return false;
    };
    bool ok = false;
    if (schema["type"].is_string()) {
      ok = matches(schema["type"].get<std::string>());
    } else {
      for (const auto& t : schema["type"]) ok = ok || matches(t.get<std::string>());
    }
    if (!ok) {
      errors += path + ": type mismatch (got " + value.dump() + ")\n";
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& candidate : schema["enum"]) ok = ok || (candidate == value);
    if (!ok) errors += path + ": not among the allowed values\n";
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!value.contains(key.get<std::string>())) {
          errors += path + ": missing required key " + key.get<std::string>() + "\n";
        }
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema["properties"].items()) {
        if (value.contains(key)) collect_schema_errors(sub, value[key], path + "." + key, errors);
      }
      if (schema.value("additionalProperties", json(true)) == json(false)) {
        for (const auto& [key, ignored] : value.items()) {
          if (!schema["properties"].contains(key)) {
            errors += path + ": unexpected key " + key + "\n";
          }
        }
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    int i = 0;
    for (const auto& element : value) {
      collect_schema_errors(schema["items"], element, path + "[" + std::to_string(i++) + "]",
                            errors);
    }
  }
}

json parse_against_schema(const std::string& text, const std::string& schema_name) {
  const json value = json::parse(text);
  const json schema = json::parse(read_file(fs::path(source_dir()) / "schemas" / schema_name));
  std::string errors;
  collect_schema_errors(schema, value, "$", errors);
  CHECK_MESSAGE(errors.empty(), errors);
  return value;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("eval reports the map, its derivative, and the log-derivative") {
  const RunResult r = run("eval --spec " + doubling_file() + " --re 0.3");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "eval.json");
  CHECK(doc["meta"]["command"] == "eval");
  CHECK(doc["meta"]["seed"].is_null());
  CHECK(doc["meta"]["spec_hash"].get<std::string>().size() == 16);
  CHECK(doc["phi"]["re"].get<double>() == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(doc["phi"]["im"].get<double>() == 0.0);
  CHECK(doc["phi_prime"]["re"].get<double>() == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(doc["log_derivative"]["re"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));

  const RunResult at_zero = run("eval --spec " + doubling_file() + " --re 0 --im 0");
  REQUIRE(at_zero.exit_code == 0);
  CHECK(parse_against_schema(at_zero.out, "eval.json")["log_derivative"].is_null());
}

TEST_CASE("dw finds the interior fixed point and rejects mobius maps") {
  const RunResult r = run("dw --spec " + doubling_file());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "dw.json");
  CHECK(doc["interior"] == true);
  CHECK(doc["point"]["re"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(doc["derivative_modulus"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));

  const RunResult bad = run("dw --spec " + mobius_file());
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("non-Moebius") != std::string::npos);
}

TEST_CASE("clark lists the preimage atoms of a boundary point") {
  const RunResult r = run("clark --spec " + doubling_file() + " --x 0.5");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "clark.json");
  REQUIRE(doc["atoms"].size() == 2);
  CHECK(doc["atoms"][0]["t"].get<double>() == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(doc["atoms"][0]["weight"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(doc["total_mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc["captured_mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("matrix dumps the analytic block as csv") {
  const RunResult r = run("matrix --spec " + doubling_file() + " --M 4");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("# command: matrix") != std::string::npos);
  CHECK(r.out.find("# kappa: 2") != std::string::npos);
  CHECK(r.out.find("# truncation_mass:") != std::string::npos);
  const std::vector<std::string> lines = data_lines(r.out);
  REQUIRE(lines.size() == 17);  // header plus 4x4 entries
  CHECK(lines[0] == "k,l,re,im");
  CHECK(lines[2] == "2,1,1,0");
  CHECK(lines[1] == "1,1,0,0");
}

TEST_CASE("gap reports norms against the theoretical bound") {
  const RunResult r = run("gap --spec " + blaschke_file() + " --N 4");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "gap.json");
  REQUIRE(doc["entries"].size() == 4);
  CHECK(doc["entries"][0]["N"] == 1);
  for (const auto& entry : doc["entries"]) {
    CHECK(entry["measured_norm"].get<double>() <= entry["bicycle_bound"].get<double>() + 1e-9);
  }
  CHECK(doc["meta"]["params"]["b"].get<double>() == 1.5);
  CHECK(doc["meta"]["params"]["M"] == 96);
}

TEST_CASE("radius estimates the essential spectral radius") {
  const RunResult r = run("radius --spec " + blaschke_file());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "radius.json");
  CHECK(doc["phi_prime_modulus"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(doc["estimate"].get<double>() - 0.5) < 0.05);
}

TEST_CASE("twist reports the leading eigenvalue of the tilted operator") {
  const RunResult r = run("twist --spec " + doubling_file() + " --t 0.3 --M 32");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "twist.json");
  CHECK(doc["lambda_abs"].get<double>() < 1.0);
  CHECK(doc["lambda_abs"].get<double>() > 0.8);
  CHECK(doc["gap_ratio"].get<double>() > 1.05);

  const RunResult named = run("twist --spec " + doubling_file() + " --t 0.3 --M 32 --psi sin");
  CHECK(named.exit_code == 0);
  const json sin_doc = parse_against_schema(named.out, "twist.json");
  CHECK(sin_doc["lambda_abs"].get<double>() < 1.0);
  CHECK(sin_doc["lambda_abs"].get<double>() > 0.8);

  const RunResult from_file =
      run("twist --spec " + doubling_file() + " --t 0.3 --M 32 --psi " + psi_file());
  CHECK(from_file.exit_code == 0);
  const json file_doc = parse_against_schema(from_file.out, "twist.json");
  CHECK(file_doc["lambda"]["re"].get<double>() ==
        doctest::Approx(doc["lambda"]["re"].get<double>()).epsilon(1e-10));
}

TEST_CASE("clt output is deterministic for a fixed seed") {
  const std::string args = "clt --spec " + doubling_file() + " --n 300 --trials 5000 --seed 7";
  const fs::path first = scratch() / "clt1.json";
  const fs::path second = scratch() / "clt2.json";
  const RunResult r1 = run(args + " --out " + first.string());
  const RunResult r2 = run(args + " --out " + second.string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(r1.out.empty());
  CHECK(read_file(first) == read_file(second));

  const json doc = parse_against_schema(read_file(first), "clt.json");
  CHECK(doc["meta"]["seed"] == 7);
  CHECK(doc["sigma2_eigen"].get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(std::abs(doc["sigma2_mc"].get<double>() - 0.5) < 0.05);
  CHECK(doc["ks_distance"].get<double>() < 0.1);

  const RunResult missing = run("clt --spec " + doubling_file() + " --n 300 --trials 5000");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("clt output does not depend on the thread count") {
  const std::string args = "clt --spec " + doubling_file() + " --n 200 --trials 3000 --seed 5";
  const fs::path one = scratch() / "clt_t1.json";
  const fs::path four = scratch() / "clt_t4.json";
  REQUIRE(run(args + " --threads 1 --out " + one.string()).exit_code == 0);
  REQUIRE(run(args + " --threads 4 --out " + four.string()).exit_code == 0);
  CHECK(read_file(one) == read_file(four));
}

TEST_CASE("llt reports interval hit rates and rejects hopeless intervals") {
  const RunResult r =
      run("llt --spec " + doubling_file() + " --n 200 --trials 100000 --interval 0.5 --seed 13");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "llt.json");
  REQUIRE(doc["entries"].size() == 2);
  CHECK(doc["entries"][0]["kappa"].get<double>() == 0.0);
  CHECK(doc["entries"][0]["hits"].get<long long>() >= 100);
  CHECK(doc["entries"][0]["relative_error"].get<double>() < 0.2);

  const RunResult hopeless =
      run("llt --spec " + doubling_file() + " --n 100 --trials 2000 --interval 1e-7 --seed 13");
  CHECK(hopeless.exit_code == 3);
  CHECK(hopeless.err.find("widen the interval") != std::string::npos);
}

TEST_CASE("scan writes one csv row per kept grid point") {
  const RunResult r = run("scan --spec " + doubling_file() +
                          " --t-min 0.2 --t-max 0.6 --t-step 0.2 --M 16");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("# aperiodicity_max: ") != std::string::npos);
  const std::vector<std::string> lines = data_lines(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "t,re,im,abs");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const double abs_value = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(abs_value < 1.0);
    CHECK(abs_value > 0.0);
  }
}

TEST_CASE("orbit traces the boundary dynamics as csv") {
  const RunResult r = run("orbit --spec " + doubling_file() + " --theta0 0.2 --n 4");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("# perturbation_steps:") != std::string::npos);
  const std::vector<std::string> lines = data_lines(r.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "j,theta");
  CHECK(lines[2].substr(0, 2) == "1,");
  CHECK(std::stod(lines[2].substr(2)) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("construct builds an inner function from a clark measure") {
  const RunResult r = run("construct --measure " + measure_file());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "construct.json");
  CHECK(doc["spec"]["rotation"]["re"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  REQUIRE(doc["spec"]["zeros"].size() == 1);
  CHECK(doc["spec"]["zeros"][0]["mult"] == 2);
  CHECK(doc["spec"]["atoms"].empty());
  CHECK(doc["roundtrip_max_error"].get<double>() < 1e-10);
}

TEST_CASE("construct --spec-out writes a spec consumable by the other commands") {
  const fs::path built = scratch() / "built_spec.json";
  const RunResult r =
      run("construct --measure " + measure_file() + " --spec-out " + built.string());
  REQUIRE(r.exit_code == 0);

  // The quarter-pair measure reconstructs phi = -z^2, so phi(0.3) = -0.09.
  const RunResult ev = run("eval --spec " + built.string() + " --re 0.3");
  REQUIRE(ev.exit_code == 0);
  const json doc = json::parse(ev.out);
  CHECK(doc["phi"]["re"].get<double>() == doctest::Approx(-0.09).epsilon(1e-9));
  CHECK(std::abs(doc["phi"]["im"].get<double>()) < 1e-10);

  const RunResult dw = run("dw --spec " + built.string());
  REQUIRE(dw.exit_code == 0);
  CHECK(json::parse(dw.out)["interior"].get<bool>());
}

TEST_CASE("adler reports expansion and distortion constants") {
  const RunResult r = run("adler --spec " + boole_file() + " --grid 512 --dmax 4");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_against_schema(r.out, "adler.json");
  CHECK(doc["min_tau_prime"].get<double>() == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(doc["expansion_power"] == 1);
  CHECK(doc["lower_bound_tau_prime"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("usage errors and bad inputs exit with code 2") {
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("eval --re 0.3").exit_code == 2);  // missing --spec

  const RunResult missing = run("eval --spec " + scratch().string() + "/no-such.json --re 0");
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("cannot read file") != std::string::npos);

  const std::string bad = fixture("bad_rotation.json",
                                  "{\"rotation\": {\"re\": 2, \"im\": 0},"
                                  " \"zeros\": [{\"re\": 0, \"im\": 0, \"mult\": 2}]}")
                              .string();
  const RunResult rejected = run("eval --spec " + bad + " --re 0");
  CHECK(rejected.exit_code == 2);
  CHECK(rejected.err.find("rotation") != std::string::npos);

  CHECK(run("--help").exit_code == 0);
  CHECK(run("eval --help").exit_code == 0);
}

TEST_CASE("the out flag writes exactly what stdout would carry") {
  const RunResult direct = run("eval --spec " + doubling_file() + " --re 0.25");
  REQUIRE(direct.exit_code == 0);
  const fs::path target = scratch() / "eval_out.json";
  const RunResult filed = run("eval --spec " + doubling_file() + " --re 0.25 --out " + target.string());
  REQUIRE(filed.exit_code == 0);
  CHECK(filed.out.empty());
  CHECK(read_file(target) == direct.out);
}
