// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <lcf/morphism.hpp>
#include <lcf/plb.hpp>
#include <lcf/vbundle.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "expr_corpus.hpp"
#include "helpers.hpp"

using namespace lcf;

namespace {

/// Running maximum that remembers NaNs.
struct Worst {
  double value = 0.0;
  bool nan = false;
  void add(double r) {
    if (std::isnan(r))
      nan = true;
    else
      value = std::max(value, r);
  }
  bool below(double tol) const { return !nan && value < tol; }
};

struct Outcome {
  bool passed = true;
  std::vector<std::string> notes;

  void require(const std::string& what, const Worst& w, double tol) {
    const bool ok = w.below(tol);
    passed = passed && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3g%s%s < %.0e", what.c_str(), w.value, w.nan ? " (nan)" : "", ok ? "" : " NOT", tol);
    notes.emplace_back(buf);
  }
  void require_above(const std::string& what, double value, double bound) {
    const bool ok = value > bound;
    passed = passed && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3g%s > %.0e", what.c_str(), value, ok ? "" : " NOT", bound);
    notes.emplace_back(buf);
  }
  void require_true(const std::string& what, bool ok) {
    passed = passed && ok;
    notes.push_back(what + (ok ? " ok" : " FAILED"));
  }
};

const char* const kPassing[] = {"flat.json", "abelian.json", "monopole.json", "sphere_frame.json"};

LocalConnectionData bundle(const std::string& name, const ParamMap& p = {}) { return load_bundle(oracle::fixture(name), p); }

std::vector<LocalConnectionData> passing_fixtures() {
  std::vector<LocalConnectionData> out;
  out.push_back(bundle("flat.json"));
  out.push_back(bundle("abelian.json"));
  for (double k : {1.0, 2.0, 3.0}) out.push_back(bundle("monopole.json", {{"k", k}}));
  out.push_back(bundle("sphere_frame.json"));
  return out;
}

Vector point_in(const Box& box, Rng& rng) {
  std::vector<std::pair<double, double>> b;
  for (const auto& i : box) b.emplace_back(i.lo, i.hi);
  return oracle::random_point(b, rng);
}

Matrix random_element(const LocalConnectionData& d, Rng& rng) {
  return random_group_element(d.group.n, d.group.generators, rng, 0.7);
}

LocalForm random_form(int n, int d, Rng& rng) {
  LocalForm f{"U", n, {}};
  for (int i = 0; i < d; ++i) {
    const std::string text = oracle::literal(oracle::random_matrix(n, rng, 1.0)) + " + x1 * " +
                             oracle::literal(oracle::random_matrix(n, rng, 1.0)) + " + sin(x2) * " +
                             oracle::literal(oracle::random_matrix(n, rng, 1.0));
    f.coeffs.push_back(MatrixField::from_expr(parse(text, {"x1", "x2"}), {}));
  }
  return f;
}

// ---------------------------------------------------------------------------

Outcome compatibility_suite() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  Worst good;
  for (auto d : passing_fixtures()) {
    d.plan.grid = {20};
    d.plan.random = 50;
    good.add(check_cocycle(d, 1e-8).max_residual());
    good.add(check_compatibility(d, 1e-8).max_residual());
  }
  out.require("passing fixtures max residual", good, 1e-8);
  double weakest = std::numeric_limits<double>::infinity();
  for (const char* f : {"flat_mutated.json", "abelian_mutated.json", "monopole_mutated.json", "sphere_frame_mutated.json"}) {
    auto d = bundle(f);
    d.plan.grid = {20};
    d.plan.random = 50;
    const double r = std::max(check_cocycle(d, 1e-8).max_residual(), check_compatibility(d, 1e-8).max_residual());
    weakest = std::min(weakest, r);
  }
  out.require_above("weakest mutant residual", weakest, 1e-3);
  Worst seconds;
  seconds.add(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  out.require("runtime seconds", seconds, 10.0);
  return out;
}

Outcome gauge_suite() {
  Outcome out;
  Rng rng(2);
  Worst round_trip, product_rule, triple_rule, inverse_rule;
  for (int s = 0; s < 100; ++s) {
    const auto g = oracle::random_group_map(3, 2, rng), h = oracle::random_group_map(3, 2, rng);
    const auto k = oracle::random_group_map(3, 2, rng);
    const LocalForm w = random_form(3, 2, rng);
    const auto back = gauge_transform(gauge_transform(w, g), inverse(g));
    const Vector x = oracle::random_point({{-1, 1}, {-1, 1}}, rng), v = oracle::random_direction(2, rng);
    round_trip.add((back(x, v) - w(x, v)).norm());
    const Matrix dg = log_diff_left(g, x, v);
    product_rule.add((log_diff_left(product(g, h), x, v) - adjoint(group_inverse(h(x)), dg) - log_diff_left(h, x, v)).norm());
    const Matrix hk_inv = group_inverse(h(x) * k(x)), k_inv = group_inverse(k(x));
    triple_rule.add((log_diff_left(product(product(g, h), k), x, v) - adjoint(hk_inv, dg) -
                     adjoint(k_inv, log_diff_left(h, x, v)) - log_diff_left(k, x, v))
                        .norm());
    inverse_rule.add((log_diff_left(inverse(g), x, v) + adjoint(g(x), dg)).norm());
  }
  for (const char* f : kPassing) {
    const auto d = bundle(f);
    for (const auto& [chart, w] : d.forms) {
      const auto g = oracle::random_group_map(d.group.n, w.dim(), rng, 0.3);
      const auto back = gauge_transform(gauge_transform(w, g), inverse(g));
      const auto& c = d.atlas.chart(chart);
      for (int s = 0; s < 20; ++s) {
        const Vector x = point_in(c.box, rng), v = oracle::random_direction(c.dim(), rng);
        round_trip.add((back(x, v) - w(x, v)).norm());
      }
    }
  }
  out.require("gauge round trip", round_trip, 1e-9);
  out.require("product rule", product_rule, 1e-8);
  out.require("triple product rule", triple_rule, 1e-8);
  out.require("signed inverse rule", inverse_rule, 1e-8);
  return out;
}

Outcome global_form_suite() {
  Outcome out;
  Rng rng(3);
  Worst fundamental, equivariance, independence;
  for (const auto& d : passing_fixtures()) {
    const int n = d.group.n;
    for (int s = 0; s < 50; ++s) {
      const auto& c = d.atlas.charts[static_cast<std::size_t>(s) % d.atlas.charts.size()];
      const PointRep p{c.id, point_in(c.box, rng), random_element(d, rng)};
      const Matrix X = oracle::random_matrix(n, rng, 1.0);
      fundamental.add((global_form_eval(d, p, fundamental_vector(p, X)) - X).norm());
      const TangentRep u{oracle::random_direction(c.dim(), rng), oracle::random_matrix(n, rng, 1.0)};
      const Matrix g = random_element(d, rng);
      const auto [pg, ug] = right_translate(p, u, g);
      equivariance.add((global_form_eval(d, pg, ug) - adjoint(group_inverse(g), global_form_eval(d, p, u))).norm());
    }
    for (const auto& o : d.atlas.overlaps)
      for (const auto& x : sample_overlap(d.atlas, o, d.plan)) {
        const PointRep p{o.from, x, random_element(d, rng)};
        const TangentRep u{oracle::random_direction(static_cast<int>(x.size()), rng), p.a * oracle::random_matrix(n, rng, 1.0)};
        const auto [q, uq] = chart_change(d, p, u, o.to);
        independence.add((global_form_eval(d, p, u) - global_form_eval(d, q, uq)).norm());
      }
  }
  out.require("fundamental vectors", fundamental, 1e-12);
  out.require("right equivariance", equivariance, 1e-12);
  out.require("chart independence", independence, 1e-8);
  return out;
}

/// th_a = Ad(h_a) w_a - dh_a h_a^-1, written with the right logarithmic differential.
LocalConnectionData conjugate_by(const LocalConnectionData& w, const MorphismData& m) {
  LocalConnectionData out = w;
  out.group = Group{"GL", w.group.n, {}};
  out.forms.clear();
  for (const auto& [chart, form] : w.forms) {
    LocalForm f{chart, w.group.n, {}};
    const MatrixField h = m.local(chart).field;
    for (int i = 0; i < form.dim(); ++i)
      f.coeffs.push_back(MatrixField::value_only([form, h, i](const Vector& x) {
        return Matrix(adjoint(h(x), form.coefficient(i, x)) - log_diff_right(h, x, Vector::Unit(x.size(), i)));
      }));
    out.forms.emplace(chart, std::move(f));
  }
  out.transitions = induced_transitions(w, m);
  return out;
}

MorphismData random_morphism(const LocalConnectionData& w, const GroupMorphism& phi, Rng& rng) {
  MorphismData m{phi, {}, std::nullopt};
  for (const auto& c : w.atlas.charts)
    m.h.emplace(c.id, GroupValuedMap{c.id, oracle::random_group_map(phi.target_dim(), c.dim(), rng, 0.3)});
  return m;
}

double form_gap(const LocalConnectionData& a, const LocalConnectionData& b) {
  double worst = 0.0;
  for (const auto& c : a.atlas.charts)
    for (const auto& x : sample(a.plan, c.box))
      for (int k = 0; k < c.dim(); ++k) worst = std::max(worst, (a.form(c.id).coefficient(k, x) - b.form(c.id).coefficient(k, x)).norm());
  return worst;
}

Outcome relatedness_suite() {
  Outcome out;
  Worst related, cocycle, pushed, unique, transitive, ad_intertwine, mc_intertwine, quotient;
  const auto fixtures = passing_fixtures();
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(static_cast<std::uint64_t>(400 + seed));
    const auto& w = fixtures[static_cast<std::size_t>(seed) % fixtures.size()];
    const auto m = random_morphism(w, GroupMorphism::identity(w.group.n), rng);
    const auto th = conjugate_by(w, m);
    related.add(check_related(w, th, m, 1e-8).max_residual());
    cocycle.add(check_morphism_cocycle(w, m, th.transitions, 1e-8).max_residual());
    const auto p = pushforward_connection(w, m);
    pushed.add(check_compatibility(p, 1e-8).max_residual());
    unique.add(form_gap(p, th));
  }
  {
    Rng rng(5);
    const auto w = bundle("monopole.json", {{"k", 2.0}});
    const auto sq = io::load_morphism(oracle::fixture("square_morphism.json"), w);
    pushed.add(check_compatibility(pushforward_connection(w, sq), 1e-8).max_residual());
    const auto phi2 = GroupMorphism::parse("[[2,1],[1,1]] * g * [[1,-1],[-1,2]]", 2);
    const auto m1 = random_morphism(w, GroupMorphism::parse("g * g", 2), rng);
    const auto m2 = random_morphism(w, phi2, rng);
    const auto eta = pushforward_connection(pushforward_connection(w, m1), m2);
    MorphismData m{compose(phi2, m1.phi), {}, std::nullopt};
    for (const auto& c : w.atlas.charts)
      m.h.emplace(c.id, GroupValuedMap{c.id, product(m2.local(c.id).field, apply(phi2, m1.local(c.id).field))});
    transitive.add(check_related(w, eta, m, 1e-7).max_residual());
  }
  {
    Rng rng(7);
    const auto phi = GroupMorphism::parse("[[1,1,0],[0,1,0],[0,0,1]] * transpose(inv(g)) * [[1,-1,0],[0,1,0],[0,0,1]]", 3);
    for (int s = 0; s < 100; ++s) {
      const Matrix a = random_group_element(3, {}, rng, 0.5), X = oracle::random_matrix(3, rng, 1.0);
      ad_intertwine.add((phi.induced(adjoint(group_inverse(a), X)) - adjoint(group_inverse(phi(a)), phi.induced(X))).norm());
      const auto f = oracle::random_group_map(3, 2, rng), g = oracle::random_group_map(3, 2, rng);
      const Vector x = oracle::random_point({{-1, 1}, {-1, 1}}, rng), v = oracle::random_direction(2, rng);
      mc_intertwine.add((phi.induced(log_diff_left(g, x, v)) - log_diff_left(apply(phi, g), x, v)).norm());
      const Matrix lhs = log_diff_left(product(f, inverse(g)), x, v);
      quotient.add((lhs + log_diff_right(g, x, v) - adjoint(g(x), log_diff_left(f, x, v))).norm());
    }
  }
  out.require("construct-then-verify relatedness (20 seeds)", related, 1e-8);
  out.require("morphism cocycle", cocycle, 1e-8);
  out.require("pushforward compatibility", pushed, 1e-8);
  out.require("uniqueness of local forms", unique, 1e-7);
  out.require("transitivity", transitive, 1e-7);
  out.require("induced morphism intertwines Ad", ad_intertwine, 1e-8);
  out.require("induced morphism on logarithmic differentials", mc_intertwine, 1e-8);
  out.require("quotient logarithmic differential", quotient, 1e-8);
  return out;
}

Outcome christoffel_suite() {
  Outcome out;
  const auto g = io::load_christoffel(oracle::fixture("sphere_christoffel.json"));
  const auto frame = bundle("sphere_frame.json");
  const auto back = forms_to_christoffel(christoffel_to_forms(g));
  const auto again = christoffel_to_forms(forms_to_christoffel(frame));
  bool exact = true;
  Rng rng(8);
  for (int s = 0; s < 100; ++s) {
    const Vector x = oracle::random_point({{-2, 2}, {-2, 2}}, rng);
    const Vector seeds[] = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
    for (const auto& c : g.atlas.charts)
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) exact = exact && back.coefficient(c.id, i, j, k, x) == g.coefficient(c.id, i, j, k, x);
        const Jet a = again.form(c.id).coeffs[static_cast<std::size_t>(i)].jet(x, seeds);
        const Jet b = frame.form(c.id).coeffs[static_cast<std::size_t>(i)].jet(x, seeds);
        exact = exact && a.value == b.value && a.tangents[0] == b.tangents[0] && a.tangents[1] == b.tangents[1];
      }
  }
  out.require_true("conversions bit-exactly inverse", exact);
  Worst vs_oracle;
  const auto samples = io::read_json_file(oracle::fixture("sphere_christoffel_samples.json"));
  for (const auto& p : samples["points"]) {
    const Vector x = (Vector(2) << p["x"][0].get<double>(), p["x"][1].get<double>()).finished();
    for (const auto& c : g.atlas.charts)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) vs_oracle.add(std::abs(g.coefficient(c.id, i, j, k, x) - p["gamma"][i][j][k].get<double>()));
  }
  out.require("symbols vs metric oracle", vs_oracle, 1e-9);
  Worst compat;
  compat.add(check_christoffel_compat(g, 1e-7).max_residual());
  out.require("sphere compatibility", compat, 1e-7);
  const auto bad = io::load_christoffel(oracle::fixture("sphere_christoffel_perturbed.json"));
  out.require_above("perturbed residual", check_christoffel_compat(bad, 1e-7).max_residual(), 0.05);
  return out;
}

/// Richardson-extrapolated forward Euler on the equator loop in the north chart,
/// with the monopole potential written out in closed form.
Eigen::Matrix2d dense_euler_equator(double k, long steps) {
  const Eigen::Matrix2d j = (Eigen::Matrix2d() << 0, -1, 1, 0).finished();
  auto euler = [&](long n) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
    const double h = 2 * std::numbers::pi / static_cast<double>(n);
    for (long s = 0; s < n; ++s) {
      const double t = static_cast<double>(s) * h;
      const double x1 = std::cos(t), x2 = std::sin(t), v1 = -std::sin(t), v2 = std::cos(t);
      const double c = k / (1 + x1 * x1 + x2 * x2) * (-x2 * v1 + x1 * v2);
      a -= h * c * (j * a);
    }
    return a;
  };
  return 2 * euler(2 * steps) - euler(steps);
}

Outcome transport_suite() {
  Outcome out;
  Rng rng(9);
  Worst flat, abelian, monopole, equivariance;
  {
    const auto d = bundle("flat.json");
    const auto path = parse_path(io::read_json_file(oracle::fixture("flat_path.json")), d);
    const Matrix a0 = random_group_element(2, {}, rng);
    flat.add((parallel_transport(d, path, a0) - a0).norm());
  }
  for (double s : {0.0, 0.9}) {
    const double c = 0.5;
    const auto d = bundle("abelian.json", {{"c", c}, {"s", s}});
    const auto path = parse_path(io::read_json_file(oracle::fixture("abelian_path.json")), d);
    const double phase = c * 1.8 - s * (std::cos(1.9) - std::cos(0.1));
    abelian.add((parallel_transport(d, path, Matrix::Identity(2, 2), 1000) - oracle::rotation(-phase)).norm());
  }
  for (double k : {1.0, 2.0, 3.0}) {
    const auto d = bundle("monopole.json", {{"k", k}});
    const auto path = parse_path(io::read_json_file(oracle::fixture("monopole_equator.json")), d);
    const Eigen::Matrix2d ref = dense_euler_equator(k, 1000000);
    monopole.add((parallel_transport(d, path, Matrix::Identity(2, 2)) - Matrix(ref)).norm());
  }
  double worst_ratio = std::numeric_limits<double>::infinity();
  {
    const double c = 0.5, s = 0.9;
    const auto d = bundle("abelian.json", {{"c", c}, {"s", s}});
    const auto path = parse_path(io::read_json_file(oracle::fixture("abelian_path.json")), d);
    const Matrix exact = oracle::rotation(-(c * 1.8 - s * (std::cos(1.9) - std::cos(0.1))));
    double prev = 0.0;
    for (int steps : {4, 8, 16, 32}) {
      const double err = (parallel_transport(d, path, Matrix::Identity(2, 2), steps) - exact).norm();
      if (prev > 0.0) worst_ratio = std::min(worst_ratio, prev / err);
      prev = err;
    }
  }
  for (const char* f : {"sphere_frame.json", "monopole.json"}) {
    const auto d = bundle(f);
    const auto path = parse_path(io::read_json_file(oracle::fixture("monopole_equator.json")), d);
    for (int s = 0; s < 5; ++s) {
      const Matrix a0 = random_group_element(2, {}, rng), g = random_group_element(2, {}, rng);
      equivariance.add((parallel_transport(d, path, a0 * g, 200) - parallel_transport(d, path, a0, 200) * g).norm());
    }
  }
  out.require("flat transport", flat, 1e-12);
  out.require("abelian closed form", abelian, 1e-8);
  out.require("monopole loop vs dense Euler", monopole, 1e-6);
  out.require_above("RK4 halving ratio (>= 8)", worst_ratio, 8.0 - 1e-12);
  out.require("equivariance", equivariance, 1e-10);
  return out;
}

Outcome tower_suite() {
  Outcome out;
  const auto t = io::load_tower(oracle::fixture("tower.json"));
  out.require_true("depth 4 unipotent tower", t.depth() == 4);
  Worst related, projected, consistency;
  related.add(check_tower_related(t, 1e-8).max_residual());
  for (int i = 1; i <= t.depth(); ++i) projected.add(form_gap(project_connection(t, i), t.level(i)));
  const auto& top = t.level(t.depth());
  Rng rng(10);
  for (int s = 0; s < 100; ++s) {
    const auto& c = top.atlas.charts[static_cast<std::size_t>(s) % top.atlas.charts.size()];
    const PointRep p{c.id, point_in(c.box, rng), random_element(top, rng)};
    const TangentRep u{oracle::random_direction(c.dim(), rng), p.a * random_algebra_element(top.group.n, top.group.generators, rng)};
    consistency.add(projective_consistency(t, limit_eval(t, p, u)));
  }
  out.require("tower relatedness", related, 1e-8);
  out.require("projection reproduces levels", projected, 1e-8);
  out.require("limit consistency (100 samples)", consistency, 1e-8);
  return out;
}

Outcome operator_d_suite() {
  Outcome out;
  Rng rng(11);
  bool exact = true;
  Worst equivariance, well_defined;
  for (const char* f : kPassing) {
    const auto d = bundle(f);
    const int n = d.group.n;
    for (const auto& c : d.atlas.charts) {
      const auto D = connection_operator_D(d, SectionRep{c.id, c.box, MatrixField::constant(Matrix::Identity(n, n))});
      for (int s = 0; s < 20; ++s) {
        const Vector x = point_in(c.box, rng), v = oracle::random_direction(c.dim(), rng);
        exact = exact && D(x, v) == d.form(c.id)(x, v);
      }
      for (int trial = 0; trial < 5; ++trial) {
        const SectionRep sec{c.id, c.box, oracle::random_group_map(n, c.dim(), rng, 0.3)};
        const auto a = oracle::random_group_map(n, c.dim(), rng, 0.3);
        const auto lhs = connection_operator_D(d, right_multiply(sec, a));
        const auto Ds = connection_operator_D(d, sec);
        for (int s = 0; s < 10; ++s) {
          const Vector x = point_in(c.box, rng), v = oracle::random_direction(c.dim(), rng);
          equivariance.add((lhs(x, v) - adjoint(group_inverse(a(x)), Ds(x, v)) - log_diff_left(a, x, v)).norm());
        }
      }
    }
    for (const auto& o : d.atlas.overlaps) {
      const auto& back = *d.atlas.find_overlap(o.to, o.from);
      const auto g = oracle::random_group_map(n, d.atlas.chart(o.from).dim(), rng, 0.2);
      const auto D_from = connection_operator_D(d, SectionRep{o.from, d.atlas.chart(o.from).box, g});
      const auto D_to = connection_operator_D(
          d, SectionRep{o.to, d.atlas.chart(o.to).box, product(d.transition(o.to, o.from).field, pullback(g, back.map))});
      for (const auto& x : sample_overlap(d.atlas, o, d.plan)) {
        const Vector v = oracle::random_direction(static_cast<int>(x.size()), rng);
        const auto [y, w] = pushforward_vector(o, x, v);
        well_defined.add((D_from(x, v) - D_to(y, w)).norm());
      }
    }
  }
  out.require_true("natural sections give the local forms exactly", exact);
  out.require("equivariance over random sections", equivariance, 1e-8);
  out.require("well-defined across charts", well_defined, 1e-8);
  return out;
}

Outcome ad_suite() {
  Outcome out;
  oracle::ExprGenerator gen(500);
  const ParamMap params{{"p", 0.7}};
  Worst err;
  for (int i = 0; i < 500; ++i) {
    const std::string src = i % 2 ? gen.scalar(3) : gen.matrix(2);
    const Expr e = parse(src, Symbols{{"x1", "x2"}, {"p"}, {}});
    const Vector x = (Vector(2) << gen.uniform(-1, 1), gen.uniform(-1, 1)).finished();
    const Vector v = (Vector(2) << gen.uniform(-1, 1), gen.uniform(-1, 1)).finished();
    const Vector seeds[] = {v};
    err.add(oracle::relative_error(eval_dual(e, x, params, seeds).tangents[0], oracle::central_difference(e, x, v, params)));
  }
  out.require("dual vs central differences (500 cases)", err, 1e-7);
  return out;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"compatibility suite", compatibility_suite}, {"gauge-law suite", gauge_suite},
      {"global-form suite", global_form_suite},     {"relatedness suite", relatedness_suite},
      {"Christoffel suite", christoffel_suite},     {"transport suite", transport_suite},
      {"tower suite", tower_suite},                 {"operator-D suite", operator_d_suite},
      {"AD correctness", ad_suite},
  };
  int failures = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.passed = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %d %s: %s (%s)\n", index, name, o.passed ? "PASS" : "FAIL", detail.c_str());
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures ? 1 : 0;
}
