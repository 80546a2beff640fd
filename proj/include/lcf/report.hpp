#pragma once

#include <lcf/atlas.hpp>

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lcf {

inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr const char* kToolVersion = "0.1.0";

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  std::size_t samples = 0;
  double tolerance = kDefaultTolerance;
  bool passed = true;
  bool informational = false;  // lint entries; never affect the verdict
};

/// Running maximum of a residual over samples.
class ResidualMax {
 public:
  void add(double r) {
    ++count_;
    if (std::isnan(r) || r > max_) max_ = std::isnan(r) ? INFINITY : r;
  }
  double max() const { return max_; }
  std::size_t count() const { return count_; }

  CheckResult result(std::string name, double tolerance) const {
    return CheckResult{std::move(name), max_, count_, tolerance, max_ < tolerance, false};
  }

 private:
  double max_ = 0.0;
  std::size_t count_ = 0;
};

struct Report {
  std::vector<CheckResult> checks;
  SamplePlan plan;
  double tolerance = kDefaultTolerance;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed && !c.informational) return false;
    return true;
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  double max_residual() const {
    double m = 0.0;
    for (const auto& c : checks)
      if (!c.informational) m = std::max(m, c.max_residual);
    return m;
  }

  void append(const Report& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tolerance"] = tolerance;
    j["sample_plan"] = {{"grid", plan.grid}, {"random", plan.random}, {"seed", plan.seed}};
    j["passed"] = passed();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      nlohmann::ordered_json e;
      e["name"] = c.name;
      e["max_residual"] = c.max_residual;
      e["samples"] = c.samples;
      e["seed"] = plan.seed;
      e["tolerance"] = c.tolerance;
      e["passed"] = c.passed;
      if (c.informational) e["informational"] = true;
      arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    return j;
  }
};

namespace detail {

inline void write_json_string(const std::string& s, std::string& out) { out += nlohmann::json(s).dump(); }

inline void write_json(const nlohmann::ordered_json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_json_string(it.key(), out);
        out += ": ";
        write_json(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_json(e, out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        out += format_number(v);
      }
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with insertion-ordered keys and every float printed with 17
/// significant digits, so equal reports are byte-identical.
inline std::string dump_report(const nlohmann::ordered_json& j) {
  std::string out;
  detail::write_json(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace lcf
