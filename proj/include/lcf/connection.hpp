#pragma once

// Connections described by local data: compatibility of the local forms with
// the transition functions, the gauge law, the global connection form read off
// in a trivialization, horizontal lifts, parallel transport and the operator D
// acting on local sections.

#include <lcf/bundle.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lcf {

/// A total-space point p = s_a(x) . a, never materialized.
struct PointRep {
  std::string chart;
  Vector x;
  Matrix a;
};

/// A tangent vector at p: base direction v and the raw matrix derivative w of
/// the group part.
struct TangentRep {
  Vector v;
  Matrix w;
};

/// The local section s_a . g over a sub-box of chart a.
struct SectionRep {
  std::string chart;
  Box box;
  MatrixField g;
};

inline std::vector<Vector> basis(int d) {
  std::vector<Vector> out;
  for (int i = 0; i < d; ++i) out.push_back(Vector::Unit(d, i));
  return out;
}

// ---------------------------------------------------------------------------
// Consistency checks on the local data

/// Coordinate-change invariants: images land in the target chart, declared
/// back-and-forth changes invert each other, Jacobians are nonsingular.
inline Report check_atlas(const Atlas& atlas, const SamplePlan& plan, double tol = 1e-9) {
  Report rep;
  rep.plan = plan;
  rep.tolerance = tol;
  for (const auto& o : atlas.overlaps) {
    const std::string tag = o.from + "," + o.to;
    const Chart& target = atlas.chart(o.to);
    const Overlap* back = atlas.find_overlap(o.to, o.from);
    ResidualMax image, roundtrip;
    std::size_t singular = 0, seen = 0;
    for (const auto& x : sample(plan, o.domain)) {
      if (o.mask && !((*o.mask)(x)(0, 0) > 0.0)) continue;
      ++seen;
      const Vector y = apply_map(o.map, x);
      double outside = 0.0;
      for (std::size_t i = 0; i < target.box.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        outside = std::max({outside, target.box[i].lo - y[k], y[k] - target.box[i].hi});
      }
      image.add(outside);
      if (std::abs(jacobian(o.map, x).determinant()) <= kSingularDet) ++singular;
      if (back && contains(back->domain, y)) roundtrip.add((apply_map(back->map, y) - x).norm());
    }
    rep.checks.push_back(image.result("overlap_image:" + tag, tol));
    rep.checks.push_back(CheckResult{"jacobian:" + tag, static_cast<double>(singular), seen, 1.0, singular == 0, false});
    if (back) rep.checks.push_back(roundtrip.result("roundtrip:" + tag, tol));
  }
  return rep;
}

/// g_ab g_bc = g_ac on triple overlaps, g_ab g_ba = I and g_aa = I.
inline Report check_cocycle(const LocalConnectionData& data, double tol = kDefaultTolerance) {
  Report rep;
  rep.plan = data.plan;
  rep.tolerance = tol;
  const auto& atlas = data.atlas;
  const int n = data.group.n;
  const Matrix id = Matrix::Identity(n, n);
  for (const auto& ab : atlas.overlaps) {
    const auto& g_ab = data.transition(ab.from, ab.to);
    const auto points = sample_overlap(atlas, ab, data.plan);
    if (ab.from == ab.to) {
      ResidualMax r;
      for (const auto& x : points) r.add((g_ab(x) - id).norm());
      rep.checks.push_back(r.result("identity:" + ab.from, tol));
      continue;
    }
    if (const Overlap* ba = atlas.find_overlap(ab.to, ab.from)) {
      const auto& g_ba = data.transition(ba->from, ba->to);
      ResidualMax r;
      for (const auto& x : points) {
        const Vector y = apply_map(ab.map, x);
        if (!contains(ba->domain, y)) continue;
        r.add((g_ab(x) * g_ba(y) - id).norm());
      }
      rep.checks.push_back(r.result("inverse:" + ab.from + "," + ab.to, tol));
    }
    for (const auto& bc : atlas.overlaps) {
      if (bc.from != ab.to || bc.to == ab.from || bc.to == ab.to) continue;
      const Overlap* ac = atlas.find_overlap(ab.from, bc.to);
      if (!ac) continue;
      const auto& g_bc = data.transition(bc.from, bc.to);
      const auto& g_ac = data.transition(ac->from, ac->to);
      ResidualMax r;
      for (const auto& x : points) {
        if (!in_overlap(atlas, *ac, x)) continue;
        const Vector y = apply_map(ab.map, x);
        if (!in_overlap(atlas, bc, y)) continue;
        r.add((g_ab(x) * g_bc(y) - g_ac(x)).norm());
      }
      rep.checks.push_back(r.result("cocycle:" + ab.from + "," + ab.to + "," + bc.to, tol));
    }
  }
  return rep;
}

/// Residual of w_b = Ad(g_ab^-1) w_a + g_ab^-1 dg_ab on U_ab, along basis
/// direction e_i at x (a-coordinates). The b side is evaluated at psi(x) on
/// the pushed-forward direction.
inline double compatibility_residual(const LocalForm& wa, const LocalForm& wb, const Overlap& o, const MatrixField& g,
                                     const Vector& x, std::vector<double>* per_direction = nullptr) {
  const int d = static_cast<int>(x.size());
  const auto dirs = basis(d);
  const Jet gj = g.jet(x, dirs);
  const Jet yj = o.map.jet(x, dirs);
  const Vector y = yj.value.col(0);
  const auto mc = log_diff_left(gj);
  const Matrix g_inv = group_inverse(gj.value);
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Matrix lhs = wb(y, yj.tangents[k].col(0));
    const Matrix rhs = g_inv * wa.coefficient(i, x) * gj.value + mc[k];
    const double r = (lhs - rhs).norm();
    if (per_direction) per_direction->push_back(r);
    worst = std::max(worst, r);
  }
  return worst;
}

inline Report check_compatibility(const LocalConnectionData& data, double tol = kDefaultTolerance) {
  Report rep;
  rep.plan = data.plan;
  rep.tolerance = tol;
  for (const auto& o : data.atlas.overlaps) {
    const auto& wa = data.form(o.from);
    const auto& wb = data.form(o.to);
    const auto& g = data.transition(o.from, o.to);
    ResidualMax r;
    for (const auto& x : sample_overlap(data.atlas, o, data.plan)) r.add(compatibility_residual(wa, wb, o, g.field, x));
    rep.checks.push_back(r.result("compatibility:" + o.from + "," + o.to, tol));
  }
  return rep;
}

/// Distance of form values from the span of the declared generator basis.
/// Informational only; empty when no basis is declared.
inline Report lint_algebra(const LocalConnectionData& data, double tol = 1e-8) {
  Report rep;
  rep.plan = data.plan;
  rep.tolerance = tol;
  const auto& gens = data.group.generators;
  if (gens.empty()) return rep;
  const int n = data.group.n;
  Matrix basis_mat(n * n, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t k = 0; k < gens.size(); ++k)
    basis_mat.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vector>(gens[k].data(), n * n);
  const auto qr = basis_mat.colPivHouseholderQr();
  for (const auto& c : data.atlas.charts) {
    const auto& w = data.form(c.id);
    ResidualMax r;
    for (const auto& x : sample(data.plan, c.box))
      for (int i = 0; i < c.dim(); ++i) {
        const Matrix m = w.coefficient(i, x);
        const Vector flat = Eigen::Map<const Vector>(m.data(), n * n);
        r.add((basis_mat * qr.solve(flat) - flat).norm());
      }
    auto res = r.result("algebra_lint:" + c.id, tol);
    res.informational = true;
    rep.checks.push_back(res);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Gauge law and the global form

/// The pulled-back form along s . g: x, v -> Ad(g(x)^-1) w_x(v) + (g^-1 dg)_x(v).
inline LocalForm gauge_transform(const LocalForm& form, const MatrixField& g) {
  LocalForm out{form.chart, form.n, {}};
  for (int i = 0; i < form.dim(); ++i) {
    const int d = form.dim();
    out.coeffs.push_back(MatrixField::value_only([form, g, i, d](const Vector& x) {
      const Vector seeds[] = {Vector::Unit(d, i)};
      const Jet gj = g.jet(x, seeds);
      const auto lu = gj.value.partialPivLu();
      require_invertible(gj.value);
      return Matrix(lu.solve(form.coefficient(i, x) * gj.value + gj.tangents.front()));
    }));
  }
  return out;
}

/// Replaces every w_a by its gauge transform under u_a and every g_ab by
/// u_a^-1 g_ab u_b. Compatibility is preserved by construction.
inline LocalConnectionData gauge_change(const LocalConnectionData& data, const std::map<std::string, MatrixField>& u) {
  LocalConnectionData out = data;
  for (auto& [chart, form] : out.forms) form = gauge_transform(data.form(chart), u.at(chart));
  for (auto& [key, g] : out.transitions) {
    const Overlap* o = data.atlas.find_overlap(key.first, key.second);
    g.field = product(product(inverse(u.at(key.first)), g.field), pullback(u.at(key.second), o->map));
  }
  return out;
}

inline void check_point(const LocalConnectionData& data, const PointRep& p) {
  const Chart& c = data.atlas.chart(p.chart);
  if (p.x.size() != c.dim()) throw ShapeError("point dimension does not match chart " + c.id);
  if (p.a.rows() != data.group.n || p.a.cols() != data.group.n) throw ShapeError("group part has wrong size");
}

/// w_p(u) = Ad(a^-1) w_a,x(v) + a^-1 w.
inline Matrix global_form_eval(const LocalConnectionData& data, const PointRep& p, const TangentRep& u) {
  check_point(data, p);
  require_invertible(p.a);
  const auto lu = p.a.partialPivLu();
  return lu.solve(data.form(p.chart)(p.x, u.v) * p.a + u.w);
}

/// X* at p: no base component, group part a X.
inline TangentRep fundamental_vector(const PointRep& p, const Matrix& x) {
  return TangentRep{Vector::Zero(p.x.size()), p.a * x};
}

/// Right translation by g of a point and of a tangent vector at it.
inline std::pair<PointRep, TangentRep> right_translate(const PointRep& p, const TangentRep& u, const Matrix& g) {
  return {PointRep{p.chart, p.x, p.a * g}, TangentRep{u.v, u.w * g}};
}

/// The same point seen from chart `target`: g_target(p) = g_ab(x)^-1 a.
inline PointRep chart_change(const LocalConnectionData& data, const PointRep& p, const std::string& target) {
  if (target == p.chart) return p;
  const Overlap* o = data.atlas.find_overlap(p.chart, target);
  if (!o) throw DomainError("no overlap declared from " + p.chart + " to " + target);
  if (!contains(o->domain, p.x, 1e-12)) throw DomainError("point outside overlap " + p.chart + "->" + target);
  const Matrix g = data.transition(p.chart, target)(p.x);
  return PointRep{target, apply_map(o->map, p.x), group_inverse(g) * p.a};
}

/// Point and tangent converted together; the group part differentiates
/// g_ab(x(t))^-1 a(t) by the product rule.
inline std::pair<PointRep, TangentRep> chart_change(const LocalConnectionData& data, const PointRep& p,
                                                    const TangentRep& u, const std::string& target) {
  if (target == p.chart) return {p, u};
  const Overlap* o = data.atlas.find_overlap(p.chart, target);
  if (!o) throw DomainError("no overlap declared from " + p.chart + " to " + target);
  const auto [y, vy] = pushforward_vector(*o, p.x, u.v);
  const Vector seeds[] = {u.v};
  const Jet g = jet::inverse(data.transition(p.chart, target).field.jet(p.x, seeds));
  return {PointRep{target, y, g.value * p.a}, TangentRep{vy, g.tangents.front() * p.a + g.value * u.w}};
}

/// The horizontal vector over v at p: w = -w_a,x(v) a.
inline TangentRep horizontal_lift(const LocalConnectionData& data, const PointRep& p, const Vector& v) {
  check_point(data, p);
  require_invertible(p.a);
  return TangentRep{v, -data.form(p.chart)(p.x, v) * p.a};
}

// ---------------------------------------------------------------------------
// Parallel transport

struct PathSegment {
  std::string chart;
  CoordMap curve;  // function of t, column of chart coordinates
  double t0 = 0.0;
  double t1 = 1.0;
};

inline constexpr double kJunctionTolerance = 1e-8;

/// Integrates a' = -w(gamma') a with classical RK4, `steps` per segment,
/// switching trivializations at segment junctions.
inline Matrix parallel_transport(const LocalConnectionData& data, const std::vector<PathSegment>& path,
                                 const Matrix& a0, int steps = 1000) {
  if (steps < 1) throw Error("transport needs at least one step");
  require_invertible(a0);
  Matrix a = a0;
  const Vector unit = Vector::Ones(1);
  const std::span<const Vector> seed(&unit, 1);
  auto generator = [&](const LocalForm& w, const CoordMap& curve, double t) {
    const Jet c = curve.jet(Vector::Constant(1, t), seed);
    return Matrix(-w(c.value.col(0), c.tangents.front().col(0)));
  };
  for (std::size_t s = 0; s < path.size(); ++s) {
    const auto& seg = path[s];
    if (s > 0) {
      const auto& prev = path[s - 1];
      const Vector end = apply_map(prev.curve, Vector::Constant(1, prev.t1));
      const Vector start = apply_map(seg.curve, Vector::Constant(1, seg.t0));
      if (prev.chart == seg.chart) {
        if ((end - start).norm() > kJunctionTolerance)
          throw PathDiscontinuity("segments " + std::to_string(s - 1) + " and " + std::to_string(s) + " do not meet");
      } else {
        const Overlap* o = data.atlas.find_overlap(prev.chart, seg.chart);
        if (!o) throw PathDiscontinuity("no overlap from " + prev.chart + " to " + seg.chart + " at segment " + std::to_string(s));
        if ((apply_map(o->map, end) - start).norm() > kJunctionTolerance)
          throw PathDiscontinuity("segments " + std::to_string(s - 1) + " and " + std::to_string(s) +
                                  " do not meet after the coordinate change");
        a = chart_change(data, PointRep{prev.chart, end, a}, seg.chart).a;
      }
    }
    const LocalForm& w = data.form(seg.chart);
    const double h = (seg.t1 - seg.t0) / steps;
    for (int k = 0; k < steps; ++k) {
      const double t = seg.t0 + k * h;
      const Matrix f1 = generator(w, seg.curve, t);
      const Matrix f2 = generator(w, seg.curve, t + 0.5 * h);
      const Matrix f4 = generator(w, seg.curve, t + h);
      const Matrix k1 = f1 * a;
      const Matrix k2 = f2 * (a + 0.5 * h * k1);
      const Matrix k3 = f2 * (a + 0.5 * h * k2);
      const Matrix k4 = f4 * (a + h * k3);
      a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return a;
}

/// Path file: {"segments": [{"chart": id, "curve": [exprs in t], "t_range": [t0, t1]}]}.
inline std::vector<PathSegment> parse_path(const nlohmann::json& j, const LocalConnectionData& data) {
  io::Diagnostics diag;
  std::vector<PathSegment> out;
  const auto& segs = j.is_array() ? j : j.value("segments", nlohmann::json::array());
  int k = 0;
  for (const auto& sj : segs) {
    const std::string where = "segment " + std::to_string(k++);
    const std::string chart = sj.value("chart", std::string());
    const Chart* c = data.atlas.find_chart(chart);
    if (!c) {
      diag.error(where, "unknown chart '" + chart + "'");
      continue;
    }
    const auto& curve = sj.value("curve", nlohmann::json());
    if (!curve.is_array() || static_cast<int>(curve.size()) != c->dim()) {
      diag.error(where, "curve must list " + std::to_string(c->dim()) + " expressions in t");
      continue;
    }
    std::vector<Expr> comps;
    for (const auto& e : curve) {
      auto ex = io::parse_expr(e.get<std::string>(), Symbols{{"t"}, io::param_names(data.params), {}}, where, diag);
      if (ex && ex->shape().scalar) comps.push_back(std::move(*ex));
    }
    if (static_cast<int>(comps.size()) != c->dim()) continue;
    PathSegment seg{chart, io::stack_scalars(std::move(comps), c->dim(), 1, data.params), 0.0, 1.0};
    if (sj.contains("t_range")) {
      seg.t0 = sj["t_range"][0].get<double>();
      seg.t1 = sj["t_range"][1].get<double>();
    }
    out.push_back(std::move(seg));
  }
  if (out.empty() && diag.empty()) diag.error("path", "no segments");
  diag.raise();
  return out;
}

// ---------------------------------------------------------------------------
// The operator D on local sections

/// D(s_a . g) = Ad(g^-1) w_a + g^-1 dg, restricted to the section's box.
inline LocalForm connection_operator_D(const LocalConnectionData& data, const SectionRep& sigma) {
  const Chart& c = data.atlas.chart(sigma.chart);
  if (sigma.box.size() != c.box.size()) throw ShapeError("section box has wrong dimension");
  for (std::size_t i = 0; i < c.box.size(); ++i)
    if (sigma.box[i].lo < c.box[i].lo || sigma.box[i].hi > c.box[i].hi)
      throw DomainError("section box is not inside chart " + c.id);
  return gauge_transform(data.form(sigma.chart), sigma.g);
}

/// The section s_a . g right-multiplied pointwise by a.
inline SectionRep right_multiply(const SectionRep& sigma, const MatrixField& a) {
  return SectionRep{sigma.chart, sigma.box, product(sigma.g, a)};
}

}  // namespace lcf
