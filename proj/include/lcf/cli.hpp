#pragma once

// Command-line front end. Every command loads its inputs, runs checks and
// writes a deterministic JSON report. Exit codes: 0 all checks pass, 1 some
// check fails (report still written), 2 usage or input error (no report).

#include <lcf/plb.hpp>
#include <lcf/vbundle.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace lcf::cli {

using ojson = nlohmann::ordered_json;

struct Options {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<double> tolerance;
  std::vector<int> grid;
  std::optional<int> random;
  std::optional<std::uint64_t> seed;
  std::string out;
  ParamMap params;
  int steps = 1000;
  int samples = 100;
};

struct Outcome {
  Report report;
  ojson extra = ojson::object();
  ParamMap params;
};

namespace detail {

inline void apply_plan(const Options& o, SamplePlan& plan) {
  if (!o.grid.empty()) plan.grid = o.grid;
  if (o.random) plan.random = *o.random;
  if (o.seed) plan.seed = *o.seed;
}

inline LocalConnectionData load(const Options& o, const std::string& path) {
  auto data = load_bundle(path, o.params);
  apply_plan(o, data.plan);
  return data;
}

inline double tolerance(const Options& o) { return o.tolerance.value_or(kDefaultTolerance); }

inline ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Report start(const SamplePlan& plan, double tol) {
  Report rep;
  rep.plan = plan;
  rep.tolerance = tol;
  return rep;
}

inline Outcome verify(const Options& o) {
  const auto data = load(o, o.inputs.at(0));
  const double tol = tolerance(o);
  Outcome out{start(data.plan, tol), ojson::object(), data.params};
  out.report.append(check_atlas(data.atlas, data.plan, tol));
  out.report.append(check_cocycle(data, tol));
  out.report.append(check_compatibility(data, tol));
  out.report.append(lint_algebra(data, tol));
  return out;
}

inline Outcome relate(const Options& o) {
  const auto w = load(o, o.inputs.at(0));
  const auto th = load(o, o.inputs.at(1));
  const auto m = io::load_morphism(o.inputs.at(2), w, o.params);
  const double tol = tolerance(o);
  Outcome out{start(w.plan, tol), ojson::object(), w.params};
  out.report.append(check_related(w, th, m, tol));
  return out;
}

inline Outcome push(const Options& o) {
  const auto w = load(o, o.inputs.at(0));
  const auto m = io::load_morphism(o.inputs.at(1), w, o.params);
  const double tol = tolerance(o);
  Outcome out{start(w.plan, tol), ojson::object(), w.params};
  if (m.target_transitions) {
    const auto cocycle = check_morphism_cocycle(w, m, *m.target_transitions, tol);
    out.report.append(cocycle);
    if (!cocycle.passed()) return out;
  }
  const auto th = pushforward_connection(w, m, std::nullopt, tol);
  out.report.append(check_cocycle(th, tol));
  out.report.append(check_compatibility(th, tol));
  Report related = check_related(w, th, m, tol);
  std::erase_if(related.checks, [](const CheckResult& c) { return c.name.starts_with("morphism_cocycle:"); });
  out.report.append(related);
  out.extra["note"] = "pushed-forward forms are composite evaluators; only their residuals are reported";
  return out;
}

inline Outcome assoc(const Options& o) {
  const auto w = load(o, o.inputs.at(0));
  const auto m = io::load_morphism(o.inputs.at(1), w, o.params);
  const double tol = tolerance(o);
  Outcome out{start(w.plan, tol), ojson::object(), w.params};
  const auto a = associated_connection(w, m.phi);
  out.report.append(check_cocycle(a, tol));
  out.report.append(check_compatibility(a, tol));
  return out;
}

inline Outcome transport(const Options& o) {
  const auto data = load(o, o.inputs.at(0));
  const auto path = parse_path(io::read_json_file(o.inputs.at(1)), data);
  const double tol = tolerance(o);
  Outcome out{start(data.plan, tol), ojson::object(), data.params};
  const int n = data.group.n;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix hol = parallel_transport(data, path, id, o.steps);
  const Matrix fine = parallel_transport(data, path, id, 2 * o.steps);
  Rng rng(data.plan.seed);
  const Matrix g = random_group_element(n, data.group.generators, rng, 0.5);
  const double equivariance = (parallel_transport(data, path, g, o.steps) - hol * g).norm();
  out.report.checks.push_back(CheckResult{"equivariance", equivariance, 1, tol, equivariance < tol, false});
  const double halving = (hol - fine).norm();
  out.report.checks.push_back(CheckResult{"step_halving", halving, 1, tol, halving < tol, true});
  out.extra["steps"] = o.steps;
  out.extra["transport"] = matrix_json(hol);
  return out;
}

/// The converted frame-bundle description, with forms written back as text.
inline ojson frame_bundle_json(const nlohmann::json& src, const ChristoffelData& g) {
  ojson b;
  b["group"] = {{"name", "GL"}, {"n", g.n}};
  for (const char* key : {"params", "sample_plan", "charts", "overlaps", "transitions"})
    if (src.contains(key)) b[key] = ojson::parse(src[key].dump());
  ojson forms = ojson::object();
  for (const auto& c : g.atlas.charts) {
    const auto& entries = g.gamma.at(c.id);
    ojson coeffs = ojson::array();
    for (int i = 0; i < c.dim(); ++i) {
      std::string text = "[";
      for (int j = 0; j < g.n; ++j) {
        text += j ? ", [" : "[";
        for (int k = 0; k < g.n; ++k) {
          const auto& f = entries[ChristoffelData::index(i, j, k, g.n)];
          text += (k ? ", " : "") + (f.source() ? f.source()->str() : std::string("?"));
        }
        text += "]";
      }
      coeffs.push_back(text + "]");
    }
    forms[c.id] = std::move(coeffs);
  }
  b["forms"] = std::move(forms);
  return b;
}

inline Outcome convert_christoffel(const Options& o) {
  const auto src = io::read_json_file(o.inputs.at(0));
  auto g = io::parse_christoffel(src, o.params);
  apply_plan(o, g.plan);
  const double tol = tolerance(o);
  Outcome out{start(g.plan, tol), ojson::object(), g.params};
  const auto data = christoffel_to_forms(g);
  out.report.append(check_cocycle(data, tol));
  out.report.append(check_christoffel_compat(g, tol));
  out.extra["bundle"] = frame_bundle_json(src, g);
  return out;
}

inline Outcome tower(const Options& o) {
  auto t = io::load_tower(o.inputs.at(0), o.params);
  for (auto& l : t.levels) apply_plan(o, l.plan);
  const double tol = tolerance(o);
  const auto& top = t.level(t.depth());
  Outcome out{start(top.plan, tol), ojson::object(), top.params};
  try {
    validate_tower(t);
  } catch (const TowerInvariantViolation& e) {
    out.report.checks.push_back(CheckResult{"tower_invariants", INFINITY, 0, tol, false, false});
    out.extra["error"] = e.what();
    return out;
  }
  out.report.append(check_tower_related(t, tol));
  for (int i = 1; i < t.depth(); ++i) {
    const auto proj = project_connection(t, i);
    for (const auto& c : top.atlas.charts) {
      ResidualMax r;
      for (const auto& x : sample(top.plan, c.box))
        for (int k = 0; k < c.dim(); ++k)
          r.add((proj.form(c.id).coefficient(k, x) - t.level(i).form(c.id).coefficient(k, x)).norm());
      out.report.checks.push_back(r.result("projection:" + std::to_string(i) + ":" + c.id, tol));
    }
    Report compat = check_compatibility(proj, tol);
    for (auto& c : compat.checks) c.name = "projection_compatibility:" + std::to_string(i) + ":" + c.name.substr(14);
    out.report.append(compat);
  }
  Rng rng(top.plan.seed);
  ResidualMax r;
  for (int s = 0; s < o.samples; ++s) {
    const auto& c = top.atlas.charts[static_cast<std::size_t>(s) % top.atlas.charts.size()];
    Vector x(c.dim()), v(c.dim());
    for (int i = 0; i < c.dim(); ++i) {
      x[i] = rng.uniform(c.box[static_cast<std::size_t>(i)].lo, c.box[static_cast<std::size_t>(i)].hi);
      v[i] = rng.uniform(-1.0, 1.0);
    }
    const int n = top.group.n;
    const Matrix a = random_group_element(n, top.group.generators, rng, 0.5);
    const Matrix w = a * random_algebra_element(n, top.group.generators, rng);
    r.add(projective_consistency(t, limit_eval(t, PointRep{c.id, x, a}, TangentRep{v, w})));
  }
  out.report.checks.push_back(r.result("limit_consistency", tol));
  out.extra["depth"] = t.depth();
  return out;
}

inline ojson render(const Options& o, const Outcome& out) {
  ojson j;
  j["tool"] = "lcf";
  j["version"] = kToolVersion;
  j["command"] = o.command;
  j["inputs"] = o.inputs;
  ojson params = ojson::object();
  for (const auto& [k, v] : out.params) params[k] = v;
  j["params"] = std::move(params);
  j["seeds"] = ojson::array({out.report.plan.seed});
  const ojson body = out.report.to_json();
  for (const auto& [k, v] : body.items()) j[k] = v;
  for (const auto& [k, v] : out.extra.items()) j[k] = v;
  return j;
}

inline std::optional<std::pair<std::string, double>> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string rhs = s.substr(eq + 1);
    const double v = std::stod(rhs, &used);
    if (used != rhs.size()) return std::nullopt;
    return std::pair{s.substr(0, eq), v};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Local connection forms on principal bundles: checks and constructions", "lcf"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::string> assignments;
  app.add_option("--tolerance", o.tolerance, "pass threshold for every residual");
  app.add_option("--grid", o.grid, "grid points per axis (one value for all axes)")->delimiter(',');
  app.add_option("--random", o.random, "number of random samples per region");
  app.add_option("--seed", o.seed, "seed for random samples");
  app.add_option("--out", o.out, "report path (default: standard output)");
  app.add_option("--param", assignments, "parameter override name=value (repeatable)");
  app.set_version_flag("--version", kToolVersion);

  struct Spec {
    const char* name;
    const char* help;
    std::vector<const char*> positional;
    Outcome (*fn)(const Options&);
  };
  const Spec specs[] = {
      {"verify", "cocycle and compatibility checks on a bundle", {"bundle"}, detail::verify},
      {"relate", "relatedness of two connections under a morphism", {"source", "target", "morphism"}, detail::relate},
      {"push", "pushforward connection through a morphism", {"source", "morphism"}, detail::push},
      {"assoc", "associated-bundle connection through a group morphism", {"bundle", "morphism"}, detail::assoc},
      {"transport", "parallel transport along a piecewise path", {"bundle", "path"}, detail::transport},
      {"convert-christoffel", "Christoffel symbols to frame-bundle forms", {"christoffel"}, detail::convert_christoffel},
      {"tower", "levelwise relatedness and projective consistency of a tower", {"tower"}, detail::tower},
  };
  std::vector<std::vector<std::string>> slots(std::size(specs));
  for (std::size_t s = 0; s < std::size(specs); ++s) {
    auto* sub = app.add_subcommand(specs[s].name, specs[s].help);
    sub->fallthrough();
    slots[s].resize(specs[s].positional.size());
    for (std::size_t k = 0; k < specs[s].positional.size(); ++k)
      sub->add_option(specs[s].positional[k], slots[s][k], "input file")->required();
    if (std::string(specs[s].name) == "transport")
      sub->add_option("--steps", o.steps, "RK4 steps per segment")->check(CLI::PositiveNumber);
    if (std::string(specs[s].name) == "tower")
      sub->add_option("--samples", o.samples, "random point/tangent samples for limit consistency")
          ->check(CLI::NonNegativeNumber);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "lcf " << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "lcf: " << e.what() << "\n";
    return 2;
  }
  for (const auto& a : assignments) {
    const auto kv = detail::parse_assignment(a);
    if (!kv) {
      err << "lcf: --param expects name=value, got '" << a << "'\n";
      return 2;
    }
    o.params[kv->first] = kv->second;
  }
  if (o.tolerance && !(*o.tolerance > 0.0)) {
    err << "lcf: --tolerance must be positive\n";
    return 2;
  }
  for (int g : o.grid)
    if (g < 0) {
      err << "lcf: --grid values must be non-negative\n";
      return 2;
    }
  if (o.random && *o.random < 0) {
    err << "lcf: --random must be non-negative\n";
    return 2;
  }

  const Spec* chosen = nullptr;
  for (std::size_t s = 0; s < std::size(specs); ++s)
    if (app.got_subcommand(specs[s].name)) {
      chosen = &specs[s];
      o.inputs = slots[s];
    }
  o.command = chosen->name;

  std::string text;
  bool passed = false;
  try {
    const Outcome result = chosen->fn(o);
    passed = result.report.passed();
    text = dump_report(detail::render(o, result));
  } catch (const Error& e) {
    err << "lcf: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "lcf: malformed description: " << e.what() << "\n";
    return 2;
  }
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f || !(f << text)) {
      err << "lcf: cannot write report to '" << o.out << "'\n";
      return 2;
    }
  }
  return passed ? 0 : 1;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace lcf::cli
