#pragma once

// Local description of a principal bundle with connection: atlas, structure
// group, transition functions g_ab and local connection forms w_a. Also the
// JSON loader shared by every description file.

#include <lcf/atlas.hpp>
#include <lcf/lie.hpp>
#include <lcf/report.hpp>

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace lcf {

struct Group {
  std::string name;
  int n = 1;
  std::vector<Matrix> generators;  // optional basis of the Lie algebra
};

/// A Lie-algebra-valued 1-form on one chart: w_x(v) = sum_i v_i coeff_i(x).
struct LocalForm {
  std::string chart;
  int n = 1;
  std::vector<MatrixField> coeffs;

  int dim() const { return static_cast<int>(coeffs.size()); }

  Matrix operator()(const Vector& x, const Vector& v) const {
    if (v.size() != dim()) throw ShapeError("direction has wrong dimension for form on " + chart);
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < dim(); ++i)
      if (v[i] != 0.0) out += v[i] * coeffs[static_cast<std::size_t>(i)](x);
    return out;
  }
  Matrix coefficient(int i, const Vector& x) const { return coeffs.at(static_cast<std::size_t>(i))(x); }
};

using ChartPair = std::pair<std::string, std::string>;
using TransitionFamily = std::map<ChartPair, GroupValuedMap>;

struct LocalConnectionData {
  Atlas atlas;
  Group group;
  TransitionFamily transitions;  // keyed by overlap (from, to); g_ab in from-coordinates
  std::map<std::string, LocalForm> forms;
  SamplePlan plan;
  ParamMap params;

  const LocalForm& form(const std::string& chart) const {
    auto it = forms.find(chart);
    if (it == forms.end()) throw ValidationError("no connection form on chart '" + chart + "'");
    return it->second;
  }
  const GroupValuedMap& transition(const std::string& a, const std::string& b) const {
    auto it = transitions.find({a, b});
    if (it == transitions.end()) throw ValidationError("no transition function for " + a + "," + b);
    return it->second;
  }
};

namespace io {

using json = nlohmann::json;

/// Collects problems while loading; syntax errors and structural errors are
/// reported together at the end.
class Diagnostics {
 public:
  void error(std::string where, const std::string& what) { messages_.push_back(std::move(where) + ": " + what); }
  void syntax(std::string where, const std::string& what) {
    syntax_ = true;
    error(std::move(where), what);
  }
  bool empty() const { return messages_.empty(); }
  void raise() const {
    if (messages_.empty()) return;
    if (syntax_) {
      std::string all;
      for (const auto& m : messages_) all += (all.empty() ? "" : "; ") + m;
      throw ParseError(all);
    }
    throw ValidationError(messages_);
  }

 private:
  std::vector<std::string> messages_;
  bool syntax_ = false;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::vector<std::string> coordinate_names(int d) {
  std::vector<std::string> out;
  for (int i = 1; i <= d; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

inline std::vector<std::string> param_names(const ParamMap& p) {
  std::vector<std::string> out;
  for (const auto& [k, v] : p) out.push_back(k);
  return out;
}

inline ParamMap parse_params(const json& j, const ParamMap& overrides) {
  ParamMap out;
  if (j.contains("params")) {
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) out[it.key()] = it.value().get<double>();
  }
  for (const auto& [k, v] : overrides) out[k] = v;
  return out;
}

/// Parses `text` and reports problems to `diag`; empty optional on failure.
inline std::optional<Expr> parse_expr(const std::string& text, Symbols sym, const std::string& where, Diagnostics& diag) {
  try {
    return parse(text, std::move(sym));
  } catch (const SyntaxError& e) {
    diag.syntax(where, e.what());
  } catch (const ValidationError& e) {
    diag.error(where, e.what());
  }
  return std::nullopt;
}

inline std::optional<MatrixField> parse_matrix_field(const json& j, int d, const ParamMap& params, int rows, int cols,
                                                     const std::string& where, Diagnostics& diag) {
  if (!j.is_string()) {
    diag.error(where, "expected an expression string");
    return std::nullopt;
  }
  auto e = parse_expr(j.get<std::string>(), Symbols{coordinate_names(d), param_names(params), {}}, where, diag);
  if (!e) return std::nullopt;
  const bool scalar_ok = rows == 1 && cols == 1 && e->shape().scalar;
  if (!scalar_ok && !(e->shape() == Shape::matrix(rows, cols))) {
    diag.error(where, "expression is a " + e->shape().str() + ", expected " + Shape::matrix(rows, cols).str());
    return std::nullopt;
  }
  return MatrixField::from_expr(std::move(*e), params);
}

/// Stacks scalar expressions into a rows x cols matrix field (row-major).
inline MatrixField stack_scalars(std::vector<Expr> entries, int rows, int cols, ParamMap params) {
  return MatrixField([entries = std::move(entries), rows, cols, params = std::move(params)](
                         const Vector& x, std::span<const Vector> s) {
    Jet out;
    out.value.resize(rows, cols);
    out.tangents.assign(s.size(), Matrix(rows, cols));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const Jet e = eval_jet(entries[static_cast<std::size_t>(r * cols + c)], x, s, params);
        out.value(r, c) = e.as_scalar();
        for (std::size_t k = 0; k < s.size(); ++k) out.tangents[k](r, c) = e.tangents[k](0, 0);
      }
    return out;
  });
}

inline std::optional<Box> parse_box(const json& j, const std::string& where, Diagnostics& diag) {
  if (!j.is_array() || j.empty()) {
    diag.error(where, "box must be a non-empty list of [lo, hi] intervals");
    return std::nullopt;
  }
  Box box;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
      diag.error(where, "interval must be [lo, hi]");
      return std::nullopt;
    }
    Interval i{iv[0].get<double>(), iv[1].get<double>()};
    if (!(i.hi > i.lo)) {
      diag.error(where, "degenerate interval");
      return std::nullopt;
    }
    box.push_back(i);
  }
  return box;
}

inline SamplePlan parse_sample_plan(const json& j) {
  SamplePlan plan;
  if (!j.contains("sample_plan")) return plan;
  const auto& p = j["sample_plan"];
  if (p.contains("grid")) {
    if (p["grid"].is_array())
      plan.grid = p["grid"].get<std::vector<int>>();
    else
      plan.grid = {p["grid"].get<int>()};
  }
  if (p.contains("random")) plan.random = p["random"].get<int>();
  if (p.contains("seed")) plan.seed = p["seed"].get<std::uint64_t>();
  return plan;
}

inline Group parse_group(const json& j, Diagnostics& diag) {
  Group g;
  if (!j.contains("group")) {
    diag.error("group", "missing");
    return g;
  }
  const auto& gj = j["group"];
  g.name = gj.value("name", std::string("GL"));
  g.n = gj.value("n", 0);
  if (g.n < 1) diag.error("group", "n must be a positive integer");
  if (gj.contains("generators")) {
    int k = 0;
    for (const auto& m : gj["generators"]) {
      Matrix x(g.n, g.n);
      bool ok = m.is_array() && static_cast<int>(m.size()) == g.n;
      for (int r = 0; ok && r < g.n; ++r) {
        ok = m[static_cast<std::size_t>(r)].is_array() && static_cast<int>(m[static_cast<std::size_t>(r)].size()) == g.n;
        for (int c = 0; ok && c < g.n; ++c) x(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
      }
      if (!ok)
        diag.error("group.generators[" + std::to_string(k) + "]", "expected an n x n numeric matrix");
      else
        g.generators.push_back(std::move(x));
      ++k;
    }
  }
  return g;
}

inline Atlas parse_atlas(const json& j, const ParamMap& params, Diagnostics& diag) {
  Atlas atlas;
  if (!j.contains("charts") || !j["charts"].is_array()) {
    diag.error("charts", "missing chart list");
    return atlas;
  }
  for (const auto& cj : j["charts"]) {
    const std::string id = cj.value("id", std::string());
    const std::string where = "chart '" + id + "'";
    if (id.empty()) {
      diag.error("charts", "chart without id");
      continue;
    }
    if (atlas.find_chart(id)) {
      diag.error(where, "duplicate chart id");
      continue;
    }
    auto box = parse_box(cj.value("box", json()), where, diag);
    if (!box) continue;
    if (cj.contains("dim") && cj["dim"].get<int>() != static_cast<int>(box->size()))
      diag.error(where, "dim does not match box");
    atlas.charts.push_back(Chart{id, std::move(*box)});
  }
  if (!j.contains("overlaps")) return atlas;
  int k = 0;
  for (const auto& oj : j["overlaps"]) {
    const std::string from = oj.value("from", std::string()), to = oj.value("to", std::string());
    const std::string where = "overlap " + std::to_string(k++) + " (" + from + "->" + to + ")";
    const Chart* a = atlas.find_chart(from);
    const Chart* b = atlas.find_chart(to);
    if (!a) diag.error(where, "unknown chart '" + from + "'");
    if (!b) diag.error(where, "unknown chart '" + to + "'");
    if (!a || !b) continue;
    auto domain = oj.contains("domain") ? parse_box(oj["domain"], where, diag) : std::optional<Box>(a->box);
    if (!domain) continue;
    if (domain->size() != a->box.size()) {
      diag.error(where, "domain dimension differs from chart '" + from + "'");
      continue;
    }
    for (std::size_t i = 0; i < domain->size(); ++i)
      if ((*domain)[i].lo < a->box[i].lo || (*domain)[i].hi > a->box[i].hi)
        diag.error(where, "domain is not inside chart '" + from + "'");
    const json map = oj.value("map", json());
    if (!map.is_array() || static_cast<int>(map.size()) != b->dim()) {
      diag.error(where, "map must list " + std::to_string(b->dim()) + " coordinate expressions");
      continue;
    }
    std::vector<Expr> comps;
    bool ok = true;
    for (std::size_t i = 0; i < map.size(); ++i) {
      const std::string w = where + " map[" + std::to_string(i) + "]";
      if (!map[i].is_string()) {
        diag.error(w, "expected an expression string");
        ok = false;
        continue;
      }
      auto e = parse_expr(map[i].get<std::string>(), Symbols{coordinate_names(a->dim()), param_names(params), {}}, w, diag);
      if (!e) {
        ok = false;
      } else if (!e->shape().scalar) {
        diag.error(w, "coordinate expression must be scalar");
        ok = false;
      } else {
        comps.push_back(std::move(*e));
      }
    }
    std::optional<MatrixField> mask;
    if (oj.contains("mask")) {
      auto e = parse_expr(oj["mask"].get<std::string>(), Symbols{coordinate_names(a->dim()), param_names(params), {}},
                          where + " mask", diag);
      if (e && e->shape().scalar)
        mask = MatrixField::from_expr(std::move(*e), params);
      else
        ok = false;
    }
    if (!ok) continue;
    const int rows = static_cast<int>(comps.size());
    atlas.overlaps.push_back(Overlap{from, to, std::move(*domain), stack_scalars(std::move(comps), rows, 1, params), std::move(mask)});
  }
  return atlas;
}

inline std::optional<ChartPair> parse_pair_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) return std::nullopt;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(' ');
    const auto e = s.find_last_not_of(' ');
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  return ChartPair{trim(key.substr(0, comma)), trim(key.substr(comma + 1))};
}

/// Transition functions keyed "a,b"; each must sit on a declared overlap a->b
/// and evaluate to an m x m matrix in a-coordinates.
inline TransitionFamily parse_transitions(const json& tj, const Atlas& atlas, int m, const ParamMap& params,
                                          Diagnostics& diag, bool require_all = true) {
  TransitionFamily out;
  if (!tj.is_null()) {
    for (auto it = tj.begin(); it != tj.end(); ++it) {
      const std::string where = "transition '" + it.key() + "'";
      auto key = parse_pair_key(it.key());
      if (!key) {
        diag.error(where, "key must be \"from,to\"");
        continue;
      }
      for (const auto& id : {key->first, key->second})
        if (!atlas.find_chart(id)) diag.error(where, "unknown chart '" + id + "'");
      const Overlap* o = atlas.find_overlap(key->first, key->second);
      if (!o) {
        if (atlas.find_chart(key->first) && atlas.find_chart(key->second))
          diag.error(where, "no overlap declared from " + key->first + " to " + key->second);
        continue;
      }
      auto f = parse_matrix_field(it.value(), atlas.chart(key->first).dim(), params, m, m, where, diag);
      if (f) out.emplace(*key, GroupValuedMap{key->first, std::move(*f)});
    }
  }
  if (require_all)
    for (const auto& o : atlas.overlaps)
      if (!out.count({o.from, o.to}) && atlas.find_chart(o.from) && atlas.find_chart(o.to))
        diag.error("overlap " + o.from + "->" + o.to, "has no transition function");
  return out;
}

inline std::map<std::string, LocalForm> parse_forms(const json& fj, const Atlas& atlas, int n, const ParamMap& params,
                                                    Diagnostics& diag) {
  std::map<std::string, LocalForm> out;
  if (!fj.is_null()) {
    for (auto it = fj.begin(); it != fj.end(); ++it) {
      const std::string where = "form '" + it.key() + "'";
      const Chart* c = atlas.find_chart(it.key());
      if (!c) {
        diag.error(where, "unknown chart '" + it.key() + "'");
        continue;
      }
      if (!it.value().is_array() || static_cast<int>(it.value().size()) != c->dim()) {
        diag.error(where, "needs " + std::to_string(c->dim()) + " coefficient expressions (one per dx_i)");
        continue;
      }
      LocalForm form{c->id, n, {}};
      bool ok = true;
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        auto f = parse_matrix_field(it.value()[i], c->dim(), params, n, n, where + " coefficient " + std::to_string(i + 1), diag);
        if (!f) {
          ok = false;
          continue;
        }
        form.coeffs.push_back(std::move(*f));
      }
      if (ok) out.emplace(c->id, std::move(form));
    }
  }
  for (const auto& c : atlas.charts)
    if (!out.count(c.id) && !(fj.is_object() && fj.contains(c.id))) diag.error("chart '" + c.id + "'", "has no connection form");
  return out;
}

}  // namespace io

/// Builds validated bundle data from a parsed description. Throws ParseError
/// for unparsable expressions and ValidationError listing every structural
/// problem otherwise.
inline LocalConnectionData parse_bundle(const nlohmann::json& j, const ParamMap& overrides = {}) {
  io::Diagnostics diag;
  LocalConnectionData data;
  if (!j.is_object()) throw ParseError("bundle description must be a JSON object");
  data.params = io::parse_params(j, overrides);
  data.group = io::parse_group(j, diag);
  data.atlas = io::parse_atlas(j, data.params, diag);
  data.plan = io::parse_sample_plan(j);
  if (data.group.n >= 1) {
    data.transitions = io::parse_transitions(j.value("transitions", nlohmann::json()), data.atlas, data.group.n, data.params, diag);
    data.forms = io::parse_forms(j.value("forms", nlohmann::json()), data.atlas, data.group.n, data.params, diag);
  }
  diag.raise();
  return data;
}

inline LocalConnectionData load_bundle(const std::string& path, const ParamMap& overrides = {}) {
  return parse_bundle(io::read_json_file(path), overrides);
}

}  // namespace lcf
