#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "innerdyn/inner_function.hpp"
#include "innerdyn/report.hpp"

namespace innerdyn {

namespace {

// Maps dotted paths ("zeros[1].mult") to the line on which the value starts,
// so invariant violations can point at the offending line of the input.
class LineLocator {
 public:
  explicit LineLocator(const std::string& text) { scan(text); }

  int line_of(const std::string& path) const {
    auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  struct Frame {
    bool is_array;
    int index = 0;
    std::string key;
    bool expecting_key = true;
  };

  void record(int line) {
    std::string path;
    for (const auto& f : frames_) {
      if (f.is_array) {
        path += "[" + std::to_string(f.index) + "]";
      } else {
        if (!path.empty()) path += ".";
        path += f.key;
      }
    }
    if (!path.empty() && !lines_.count(path)) lines_[path] = line;
  }

  void scan(const std::string& text) {
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
      char c = text[i];
      if (c == '\n') {
        ++line;
        ++i;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '{' || c == '[') {
        on_value(line);
        frames_.push_back({c == '[', 0, "", true});
        ++i;
        continue;
      }
      if (c == '}' || c == ']') {
        if (!frames_.empty()) frames_.pop_back();
        ++i;
        continue;
      }
      if (c == ',') {
        if (!frames_.empty()) {
          if (frames_.back().is_array)
            ++frames_.back().index;
          else
            frames_.back().expecting_key = true;
        }
        ++i;
        continue;
      }
      if (c == ':') {
        ++i;
        continue;
      }
      if (c == '"') {
        std::size_t start = i++;
        std::string value;
        while (i < n && text[i] != '"') {
          if (text[i] == '\\' && i + 1 < n) ++i;
          if (text[i] == '\n') ++line;
          value += text[i++];
        }
        ++i;
        (void)start;
        if (!frames_.empty() && !frames_.back().is_array && frames_.back().expecting_key) {
          frames_.back().key = value;
          frames_.back().expecting_key = false;
        } else {
          on_value(line);
        }
        continue;
      }
      // number / true / false / null
      on_value(line);
      while (i < n && std::string("}],\n \t\r:").find(text[i]) == std::string::npos) ++i;
    }
  }

  void on_value(int line) { record(line); }

  std::vector<Frame> frames_;
  std::map<std::string, int> lines_;
};

[[noreturn]] void reject(const LineLocator& loc, const std::string& path, const std::string& why) {
  int line = loc.line_of(path);
  std::string at = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw precondition_error("spec json: " + at + path + " " + why);
}

double require_number(const Json& node, const LineLocator& loc, const std::string& path) {
  if (!node.is_number()) reject(loc, path, "must be a number");
  return node.get<double>();
}

}  // namespace

InnerFunctionSpec spec_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw precondition_error("spec json: line " + std::to_string(line) + ": " + e.what());
  }
  LineLocator loc(text);
  if (!doc.is_object()) throw precondition_error("spec json: top level must be an object");

  InnerFunctionSpec spec;
  if (doc.contains("rotation")) {
    const Json& r = doc["rotation"];
    if (!r.is_object()) reject(loc, "rotation", "must be an object {re, im}");
    spec.rotation = Complex(require_number(r.value("re", Json()), loc, "rotation.re"),
                            require_number(r.value("im", Json()), loc, "rotation.im"));
    if (std::fabs(std::abs(spec.rotation) - 1.0) > 1e-14)
      reject(loc, "rotation", "must have modulus 1 within 1e-14 (got " +
                                  format_double(std::abs(spec.rotation)) + ")");
  }

  if (doc.contains("zeros")) {
    if (!doc["zeros"].is_array()) reject(loc, "zeros", "must be an array");
    int i = 0;
    for (const Json& zj : doc["zeros"]) {
      std::string path = "zeros[" + std::to_string(i) + "]";
      if (!zj.is_object()) reject(loc, path, "must be an object {re, im, mult}");
      Zero zero;
      zero.alpha = Complex(require_number(zj.value("re", Json()), loc, path + ".re"),
                           require_number(zj.value("im", Json()), loc, path + ".im"));
      zero.mult = 1;
      if (zj.contains("mult")) {
        if (!zj["mult"].is_number_integer()) reject(loc, path + ".mult", "must be an integer");
        zero.mult = zj["mult"].get<int>();
      }
      if (!(std::abs(zero.alpha) < 1.0)) reject(loc, path, "zero must lie inside the open disc");
      if (zero.mult <= 0) reject(loc, path + ".mult", "must be positive");
      for (std::size_t j = 0; j < spec.zeros.size(); ++j)
        if (spec.zeros[j].alpha == zero.alpha) reject(loc, path, "duplicates zeros[" + std::to_string(j) + "]");
      spec.zeros.push_back(zero);
      ++i;
    }
  }

  if (doc.contains("atoms")) {
    if (!doc["atoms"].is_array()) reject(loc, "atoms", "must be an array");
    int i = 0;
    for (const Json& aj : doc["atoms"]) {
      std::string path = "atoms[" + std::to_string(i) + "]";
      if (!aj.is_object()) reject(loc, path, "must be an object {t, mass}");
      Atom atom;
      double t = require_number(aj.value("t", Json()), loc, path + ".t");
      atom.location = CirclePoint(t);
      atom.mass = require_number(aj.value("mass", Json()), loc, path + ".mass");
      if (!(atom.mass > 0.0)) reject(loc, path + ".mass", "must be positive");
      for (std::size_t j = 0; j < spec.atoms.size(); ++j)
        if (spec.atoms[j].location.t == atom.location.t)
          reject(loc, path + ".t", "duplicates atoms[" + std::to_string(j) + "]");
      spec.atoms.push_back(atom);
      ++i;
    }
  }

  if (spec.zeros.empty() && spec.atoms.empty())
    throw precondition_error("spec json: zeros and atoms are both empty (constant map is not inner data)");
  spec.validate();
  return spec;
}

std::string spec_to_json(const InnerFunctionSpec& spec) {
  Json doc;
  doc["rotation"] = {{"re", spec.rotation.real()}, {"im", spec.rotation.imag()}};
  doc["zeros"] = Json::array();
  for (const auto& zero : spec.zeros)
    doc["zeros"].push_back({{"re", zero.alpha.real()}, {"im", zero.alpha.imag()}, {"mult", zero.mult}});
  doc["atoms"] = Json::array();
  for (const auto& atom : spec.atoms)
    doc["atoms"].push_back({{"t", atom.location.t}, {"mass", atom.mass}});
  return dump_json(doc);
}

}
