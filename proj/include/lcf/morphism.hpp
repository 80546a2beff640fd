#pragma once

// Bundle morphisms over a fixed base, given by a group morphism phi and local
// maps h_a into the target group. Relatedness of two connections, the
// cocycle h_ab = h_a (phi o g_ab) h_b^-1, pushforward and associated connections.

#include <lcf/connection.hpp>

#include <map>
#include <optional>
#include <string>

namespace lcf {

struct MorphismData {
  GroupMorphism phi;
  std::map<std::string, GroupValuedMap> h;  // chart id -> h_a : U_a -> H
  std::optional<TransitionFamily> target_transitions;

  const GroupValuedMap& local(const std::string& chart) const {
    auto it = h.find(chart);
    if (it == h.end()) throw AtlasMismatch("morphism has no local map on chart '" + chart + "'");
    return it->second;
  }
};

/// The morphism with phi = id and h = I on every chart of `atlas`.
inline MorphismData identity_morphism(const Atlas& atlas, int n) {
  MorphismData m{GroupMorphism::identity(n), {}, std::nullopt};
  for (const auto& c : atlas.charts) m.h.emplace(c.id, GroupValuedMap{c.id, MatrixField::constant(Matrix::Identity(n, n))});
  return m;
}

/// Same chart ids and boxes, same overlap pairs and domains.
inline void require_shared_atlas(const Atlas& a, const Atlas& b) {
  if (a.charts.size() != b.charts.size()) throw AtlasMismatch("atlases have different numbers of charts");
  for (const auto& c : a.charts) {
    const Chart* d = b.find_chart(c.id);
    if (!d) throw AtlasMismatch("chart '" + c.id + "' missing from the second atlas");
    if (d->box.size() != c.box.size()) throw AtlasMismatch("chart '" + c.id + "' has different dimensions");
    for (std::size_t i = 0; i < c.box.size(); ++i)
      if (c.box[i].lo != d->box[i].lo || c.box[i].hi != d->box[i].hi)
        throw AtlasMismatch("chart '" + c.id + "' has different boxes");
  }
  if (a.overlaps.size() != b.overlaps.size()) throw AtlasMismatch("atlases have different overlaps");
  for (const auto& o : a.overlaps)
    if (!b.find_overlap(o.from, o.to)) throw AtlasMismatch("overlap " + o.from + "->" + o.to + " missing from the second atlas");
}

inline void require_morphism_fits(const Atlas& atlas, const MorphismData& m, int n, int target_n) {
  if (m.phi.source_dim() != n) throw GroupMismatch("morphism source dimension differs from the bundle's group");
  if (m.phi.target_dim() != target_n) throw GroupMismatch("morphism target dimension differs from the target group");
  for (const auto& c : atlas.charts) m.local(c.id);
}

/// Residual of phi-bar(w_a) = Ad(h_a^-1) th_a + h_a^-1 dh_a at x, worst basis direction.
inline double related_residual(const LocalForm& w, const LocalForm& th, const GroupMorphism& phi, const MatrixField& h,
                               const Vector& x) {
  const auto dirs = basis(static_cast<int>(x.size()));
  const Jet hj = h.jet(x, dirs);
  const auto mc = log_diff_left(hj);
  const auto lu = hj.value.partialPivLu();
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    const Matrix lhs = phi.induced(w.coefficient(i, x));
    const Matrix rhs = lu.solve(th.coefficient(i, x) * hj.value) + mc[static_cast<std::size_t>(i)];
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

/// Residual of g^Q_ab = h_a (phi o g^P_ab) h_b^-1 on every overlap; h_b is
/// evaluated at the image point in b-coordinates.
inline Report check_morphism_cocycle(const Atlas& atlas, const SamplePlan& plan, const MorphismData& m,
                                     const TransitionFamily& gP, const TransitionFamily& gQ,
                                     double tol = kDefaultTolerance) {
  Report rep;
  rep.plan = plan;
  rep.tolerance = tol;
  for (const auto& o : atlas.overlaps) {
    const ChartPair key{o.from, o.to};
    if (!gP.count(key) || !gQ.count(key)) throw AtlasMismatch("no transition pair for overlap " + o.from + "->" + o.to);
    const auto& p = gP.at(key);
    const auto& q = gQ.at(key);
    const auto& ha = m.local(o.from);
    const auto& hb = m.local(o.to);
    ResidualMax r;
    for (const auto& x : sample_overlap(atlas, o, plan)) {
      const Matrix hb_inv = group_inverse(hb(apply_map(o.map, x)));
      r.add((q(x) - ha(x) * m.phi(p(x)) * hb_inv).norm());
    }
    rep.checks.push_back(r.result("morphism_cocycle:" + o.from + "," + o.to, tol));
  }
  return rep;
}

inline Report check_morphism_cocycle(const LocalConnectionData& source, const MorphismData& m,
                                     const TransitionFamily& gQ, double tol = kDefaultTolerance) {
  return check_morphism_cocycle(source.atlas, source.plan, m, source.transitions, gQ, tol);
}

/// Per-chart relatedness residuals, followed by the morphism cocycle against
/// the target's transitions.
inline Report check_related(const LocalConnectionData& w, const LocalConnectionData& th, const MorphismData& m,
                            double tol = kDefaultTolerance) {
  require_shared_atlas(w.atlas, th.atlas);
  require_morphism_fits(w.atlas, m, w.group.n, th.group.n);
  Report rep;
  rep.plan = w.plan;
  rep.tolerance = tol;
  for (const auto& c : w.atlas.charts) {
    const auto& wa = w.form(c.id);
    const auto& ta = th.form(c.id);
    const auto& h = m.local(c.id);
    ResidualMax r;
    for (const auto& x : sample(w.plan, c.box)) r.add(related_residual(wa, ta, m.phi, h.field, x));
    rep.checks.push_back(r.result("related:" + c.id, tol));
  }
  rep.append(check_morphism_cocycle(w.atlas, w.plan, m, w.transitions, th.transitions, tol));
  return rep;
}

/// f(s_a(x) a) = t_a(x) h_a(x) phi(a).
inline PointRep morphism_eval(const MorphismData& m, const PointRep& p) {
  return PointRep{p.chart, p.x, m.local(p.chart)(p.x) * m.phi(p.a)};
}

/// The target transitions forced by the morphism: h_a (phi o g_ab) h_b^-1,
/// with exact derivatives.
inline TransitionFamily induced_transitions(const LocalConnectionData& source, const MorphismData& m) {
  TransitionFamily out;
  for (const auto& o : source.atlas.overlaps) {
    const auto& g = source.transition(o.from, o.to);
    MatrixField f = product(product(m.local(o.from).field, apply(m.phi, g.field)),
                            inverse(pullback(m.local(o.to).field, o.map)));
    out.emplace(ChartPair{o.from, o.to}, GroupValuedMap{o.from, std::move(f)});
  }
  return out;
}

/// th_a = Ad(h_a) phi-bar(w_a) - dh_a h_a^-1, as value-only composite coefficients.
inline LocalForm pushforward_form(const LocalForm& w, const GroupMorphism& phi, const MatrixField& h) {
  LocalForm out{w.chart, phi.target_dim(), {}};
  const int d = w.dim();
  for (int i = 0; i < d; ++i) {
    out.coeffs.push_back(MatrixField::value_only([w, phi, h, i, d](const Vector& x) {
      const Vector seeds[] = {Vector::Unit(d, i)};
      const Jet hj = h.jet(x, seeds);
      require_invertible(hj.value);
      const auto lu_t = hj.value.transpose().partialPivLu();
      // (A h^-1) = (h^-T A^T)^T
      const Matrix num = hj.value * phi.induced(w.coefficient(i, x)) - hj.tangents.front();
      return Matrix(lu_t.solve(num.transpose()).transpose());
    }));
  }
  return out;
}

/// The unique connection on the target bundle related to `w`. Target
/// transitions are taken from `gQ`, else from the morphism file, else induced.
inline LocalConnectionData pushforward_connection(const LocalConnectionData& w, const MorphismData& m,
                                                  const std::optional<TransitionFamily>& gQ = std::nullopt,
                                                  double tol = kDefaultTolerance) {
  require_morphism_fits(w.atlas, m, w.group.n, m.phi.target_dim());
  LocalConnectionData out;
  out.atlas = w.atlas;
  out.plan = w.plan;
  out.params = w.params;
  out.group = Group{"target", m.phi.target_dim(), {}};
  for (const auto& x : w.group.generators) out.group.generators.push_back(m.phi.induced(x));
  const auto& given = gQ ? gQ : m.target_transitions;
  if (given) {
    const Report rep = check_morphism_cocycle(w.atlas, w.plan, m, w.transitions, *given, tol);
    if (!rep.passed())
      throw MorphismCocycleViolation("target transitions violate the morphism cocycle (max residual " +
                                     detail::format_number(rep.max_residual()) + ")");
    out.transitions = *given;
  } else {
    out.transitions = induced_transitions(w, m);
  }
  for (const auto& [chart, form] : w.forms) out.forms.emplace(chart, pushforward_form(form, m.phi, m.local(chart).field));
  return out;
}

/// Forms phi-bar(w_a), transitions phi o g_ab.
inline LocalConnectionData associated_connection(const LocalConnectionData& w, const GroupMorphism& phi,
                                                 const std::string& group_name = "") {
  if (phi.source_dim() != w.group.n) throw GroupMismatch("morphism source dimension differs from the bundle's group");
  LocalConnectionData out;
  out.atlas = w.atlas;
  out.plan = w.plan;
  out.params = w.params;
  out.group = Group{group_name.empty() ? w.group.name : group_name, phi.target_dim(), {}};
  for (const auto& x : w.group.generators) out.group.generators.push_back(phi.induced(x));
  for (const auto& [key, g] : w.transitions) out.transitions.emplace(key, GroupValuedMap{g.chart, apply(phi, g.field)});
  for (const auto& [chart, form] : w.forms) {
    LocalForm f{chart, phi.target_dim(), {}};
    for (const auto& c : form.coeffs)
      f.coeffs.push_back(MatrixField::value_only([c, phi](const Vector& x) { return phi.induced(c(x)); }));
    out.forms.emplace(chart, std::move(f));
  }
  return out;
}

namespace io {

/// Morphism file: {"phi": expr in g, "h": {chart: expr}, "target_transitions": {...}}.
/// Charts without an h entry get the identity.
inline MorphismData parse_morphism(const json& j, const LocalConnectionData& source, const ParamMap& overrides = {}) {
  if (!j.is_object()) throw ParseError("morphism description must be a JSON object");
  Diagnostics diag;
  ParamMap params = source.params;
  for (const auto& [k, v] : parse_params(j, overrides)) params[k] = v;
  MorphismData m;
  const int n = source.group.n;
  if (!j.contains("phi")) {
    m.phi = GroupMorphism::identity(n);
  } else if (!j["phi"].is_string()) {
    diag.error("phi", "expected an expression string");
  } else {
    try {
      m.phi = GroupMorphism::parse(j["phi"].get<std::string>(), n, params);
    } catch (const SyntaxError& e) {
      diag.syntax("phi", e.what());
    } catch (const ValidationError& e) {
      diag.error("phi", e.what());
    }
  }
  diag.raise();
  const int k = m.phi.target_dim();
  const json hj = j.value("h", json::object());
  for (auto it = hj.begin(); it != hj.end(); ++it)
    if (!source.atlas.find_chart(it.key())) diag.error("h '" + it.key() + "'", "unknown chart");
  for (const auto& c : source.atlas.charts) {
    if (!hj.contains(c.id)) {
      m.h.emplace(c.id, GroupValuedMap{c.id, MatrixField::constant(Matrix::Identity(k, k))});
      continue;
    }
    auto f = parse_matrix_field(hj[c.id], c.dim(), params, k, k, "h '" + c.id + "'", diag);
    if (f) m.h.emplace(c.id, GroupValuedMap{c.id, std::move(*f)});
  }
  if (j.contains("target_transitions"))
    m.target_transitions = parse_transitions(j["target_transitions"], source.atlas, k, params, diag);
  diag.raise();
  return m;
}

inline MorphismData load_morphism(const std::string& path, const LocalConnectionData& source,
                                  const ParamMap& overrides = {}) {
  return parse_morphism(read_json_file(path), source, overrides);
}

}  // namespace io

}  // namespace lcf
