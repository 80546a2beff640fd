#pragma once

// Linear connections on a vector bundle with fiber R^n, given by Christoffel
// symbols per chart, and their frame-bundle local forms. The chart maps are the
// identity on chart coordinates, so the conversion is an index relabeling:
// coefficient i of w_a has entry (j, k) equal to Gamma_a[i][j][k].

#include <lcf/connection.hpp>

#include <map>
#include <string>
#include <vector>

namespace lcf {

struct ChristoffelData {
  Atlas atlas;
  int n = 1;
  // chart id -> d*n*n scalar (1x1) fields, index (i*n + j)*n + k
  std::map<std::string, std::vector<MatrixField>> gamma;
  TransitionFamily transitions;  // G_ab of the vector bundle, in a-coordinates
  SamplePlan plan;
  ParamMap params;

  static std::size_t index(int i, int j, int k, int n) { return static_cast<std::size_t>((i * n + j) * n + k); }

  double coefficient(const std::string& chart, int i, int j, int k, const Vector& x) const {
    return gamma.at(chart).at(index(i, j, k, n))(x)(0, 0);
  }
};

/// The GL(n) frame-bundle data with w_a,x(v) u = Gamma_a(x)(v, u).
inline LocalConnectionData christoffel_to_forms(const ChristoffelData& g) {
  LocalConnectionData out;
  out.atlas = g.atlas;
  out.group = Group{"GL", g.n, {}};
  out.transitions = g.transitions;
  out.plan = g.plan;
  out.params = g.params;
  const int n = g.n;
  for (const auto& c : g.atlas.charts) {
    auto it = g.gamma.find(c.id);
    if (it == g.gamma.end()) throw ShapeError("no Christoffel symbols on chart '" + c.id + "'");
    const auto& entries = it->second;
    const int d = c.dim();
    if (entries.size() != static_cast<std::size_t>(d * n * n))
      throw ShapeError("chart '" + c.id + "' needs " + std::to_string(d * n * n) + " Christoffel coefficients, got " +
                       std::to_string(entries.size()));
    LocalForm form{c.id, n, {}};
    for (int i = 0; i < d; ++i) {
      std::vector<MatrixField> block(entries.begin() + i * n * n, entries.begin() + (i + 1) * n * n);
      form.coeffs.emplace_back([block = std::move(block), n](const Vector& x, std::span<const Vector> s) {
        Jet out = jet::constant(Matrix::Zero(n, n), s.size());
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const Jet e = block[static_cast<std::size_t>(j * n + k)].jet(x, s);
            out.value(j, k) = e.value(0, 0);
            for (std::size_t t = 0; t < s.size(); ++t) out.tangents[t](j, k) = e.tangents[t](0, 0);
          }
        return out;
      });
    }
    out.forms.emplace(c.id, std::move(form));
  }
  return out;
}

/// Gamma_a[i][j][k] = (coefficient i of w_a)_jk. `n` defaults to the group's.
inline ChristoffelData forms_to_christoffel(const LocalConnectionData& data, int n = -1) {
  if (n < 0) n = data.group.n;
  if (data.group.n != n)
    throw GroupMismatch("frame bundle group has dimension " + std::to_string(data.group.n) + ", fiber dimension is " +
                        std::to_string(n));
  ChristoffelData out;
  out.atlas = data.atlas;
  out.n = n;
  out.transitions = data.transitions;
  out.plan = data.plan;
  out.params = data.params;
  for (const auto& c : data.atlas.charts) {
    const auto& form = data.form(c.id);
    std::vector<MatrixField> entries;
    for (int i = 0; i < form.dim(); ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          entries.emplace_back([coeff = form.coeffs[static_cast<std::size_t>(i)], j, k](const Vector& x,
                                                                                        std::span<const Vector> s) {
            const Jet m = coeff.jet(x, s);
            Jet e;
            e.value = m.value.block(j, k, 1, 1);
            for (const auto& t : m.tangents) e.tangents.push_back(t.block(j, k, 1, 1));
            return e;
          });
    out.gamma.emplace(c.id, std::move(entries));
  }
  return out;
}

/// Compatibility of the Christoffel symbols, checked as compatibility of the
/// converted frame-bundle forms against G.
inline Report check_christoffel_compat(const ChristoffelData& g, double tol = kDefaultTolerance) {
  return check_compatibility(christoffel_to_forms(g), tol);
}

inline Report check_christoffel_compat(ChristoffelData g, const TransitionFamily& G, double tol = kDefaultTolerance) {
  g.transitions = G;
  return check_christoffel_compat(g, tol);
}

namespace io {

/// Christoffel file: {"fiber_dim": n, "charts", "overlaps", "christoffel":
/// {chart: Gamma[i][j][k] nested arrays of scalar expressions}, "transitions"}.
inline ChristoffelData parse_christoffel(const json& j, const ParamMap& overrides = {}) {
  if (!j.is_object()) throw ParseError("Christoffel description must be a JSON object");
  Diagnostics diag;
  ChristoffelData out;
  out.params = parse_params(j, overrides);
  out.n = j.value("fiber_dim", 0);
  if (out.n < 1) diag.error("fiber_dim", "must be a positive integer");
  out.atlas = parse_atlas(j, out.params, diag);
  out.plan = parse_sample_plan(j);
  const int n = out.n;
  if (n >= 1) {
    out.transitions = parse_transitions(j.value("transitions", json()), out.atlas, n, out.params, diag);
    const json cj = j.value("christoffel", json::object());
    for (auto it = cj.begin(); it != cj.end(); ++it)
      if (!out.atlas.find_chart(it.key())) diag.error("christoffel '" + it.key() + "'", "unknown chart");
    for (const auto& c : out.atlas.charts) {
      const std::string where = "christoffel '" + c.id + "'";
      if (!cj.contains(c.id)) {
        diag.error(where, "missing");
        continue;
      }
      const json& g = cj[c.id];
      const int d = c.dim();
      auto sized = [](const json& a, int len) { return a.is_array() && static_cast<int>(a.size()) == len; };
      bool ok = sized(g, d);
      for (int i = 0; ok && i < d; ++i) {
        ok = sized(g[static_cast<std::size_t>(i)], n);
        for (int r = 0; ok && r < n; ++r) ok = sized(g[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)], n);
      }
      if (!ok) {
        diag.error(where, "expected a " + std::to_string(d) + " x " + std::to_string(n) + " x " + std::to_string(n) +
                              " nested array of expressions");
        continue;
      }
      std::vector<MatrixField> entries;
      for (int i = 0; i < d; ++i)
        for (int r = 0; r < n; ++r)
          for (int k = 0; k < n; ++k) {
            const std::string w = where + "[" + std::to_string(i) + "][" + std::to_string(r) + "][" + std::to_string(k) + "]";
            auto f = parse_matrix_field(g[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)][static_cast<std::size_t>(k)],
                                        d, out.params, 1, 1, w, diag);
            if (f) entries.push_back(std::move(*f));
          }
      if (entries.size() == static_cast<std::size_t>(d * n * n)) out.gamma.emplace(c.id, std::move(entries));
    }
  }
  diag.raise();
  return out;
}

inline ChristoffelData load_christoffel(const std::string& path, const ParamMap& overrides = {}) {
  return parse_christoffel(read_json_file(path), overrides);
}

}  // namespace io

}  // namespace lcf
