#pragma once

// Matrix Lie groups inside GL(n, R): adjoint action, exponential, logarithmic
// differentials of group-valued maps and induced Lie algebra morphisms.

#include <lcf/field.hpp>
#include <lcf/random.hpp>

#include <string>

namespace lcf {

/// Elements with |det| at or below this are treated as singular.
inline constexpr double kSingularDet = 1e-10;

inline void require_invertible(const Matrix& g) {
  if (g.rows() != g.cols()) throw ShapeError("group element is not square");
  const double d = g.determinant();
  if (!(std::abs(d) > kSingularDet)) throw SingularMatrix("group element has |det| = " + detail::format_number(std::abs(d)));
}

inline Matrix group_inverse(const Matrix& g) {
  require_invertible(g);
  return g.partialPivLu().inverse();
}

/// Ad(g)X = g X g^-1.
inline Matrix adjoint(const Matrix& g, const Matrix& x) {
  if (g.rows() != x.rows() || x.rows() != x.cols()) throw ShapeError("adjoint: dimension mismatch");
  return g * x * group_inverse(g);
}

inline Matrix bracket(const Matrix& x, const Matrix& y) { return x * y - y * x; }

inline Matrix exp_matrix(const Matrix& x) {
  if (x.rows() != x.cols()) throw ShapeError("exp of a non-square matrix");
  return expm(x);
}

/// A smooth map from (part of) a chart into the group.
struct GroupValuedMap {
  std::string chart;
  MatrixField field;

  Matrix operator()(const Vector& x) const { return field(x); }
};

/// Left logarithmic differential (f^-1 df)_x(v).
inline Matrix log_diff_left(const MatrixField& f, const Vector& x, const Vector& v) {
  const Vector seeds[] = {v};
  const Jet j = f.jet(x, seeds);
  require_invertible(j.value);
  return j.value.partialPivLu().solve(j.tangents.front());
}

inline Matrix log_diff_left(const GroupValuedMap& f, const Vector& x, const Vector& v) {
  return log_diff_left(f.field, x, v);
}

/// Right logarithmic differential (df f^-1)_x(v).
inline Matrix log_diff_right(const MatrixField& f, const Vector& x, const Vector& v) {
  const Vector seeds[] = {v};
  const Jet j = f.jet(x, seeds);
  require_invertible(j.value);
  // X f = df  <=>  f^T X^T = df^T
  return j.value.transpose().partialPivLu().solve(j.tangents.front().transpose()).transpose();
}

inline Matrix log_diff_right(const GroupValuedMap& f, const Vector& x, const Vector& v) {
  return log_diff_right(f.field, x, v);
}

/// Left logarithmic differential along every seed at once, from a jet.
inline std::vector<Matrix> log_diff_left(const Jet& j) {
  require_invertible(j.value);
  const auto lu = j.value.partialPivLu();
  std::vector<Matrix> out;
  out.reserve(j.order());
  for (const auto& t : j.tangents) out.push_back(lu.solve(t));
  return out;
}

/// A smooth homomorphism between matrix groups, G in GL(n) to H in GL(m).
class GroupMorphism {
 public:
  using JetFn = std::function<Jet(const Jet&)>;

  GroupMorphism() = default;
  GroupMorphism(int source_dim, int target_dim, JetFn fn, std::optional<Expr> source = std::nullopt)
      : n_(source_dim), m_(target_dim), fn_(std::move(fn)), source_(std::move(source)) {}

  /// `text` is an expression in the n x n matrix variable `g`.
  static GroupMorphism parse(std::string_view text, int n, const ParamMap& params = {}) {
    Symbols sym;
    for (const auto& [name, value] : params) sym.params.push_back(name);
    sym.matrices.push_back({"g", n, n});
    Expr e = lcf::parse(text, std::move(sym));
    if (!e.shape().square()) throw ValidationError("morphism must produce a square matrix, got " + e.shape().str());
    const int m = e.shape().rows;
    auto src = e;
    return GroupMorphism(
        n, m,
        [e = std::move(e), params](const Jet& a) {
          const std::vector<Vector> seeds(a.order(), Vector(0));
          const std::map<std::string, Jet> bound{{"g", a}};
          return eval_jet(e, Vector(0), seeds, params, &bound);
        },
        std::move(src));
  }

  static GroupMorphism identity(int n) {
    return GroupMorphism(n, n, [](const Jet& a) { return a; });
  }

  int source_dim() const { return n_; }
  int target_dim() const { return m_; }
  const std::optional<Expr>& source() const { return source_; }

  Matrix operator()(const Matrix& a) const {
    if (a.rows() != n_ || a.cols() != n_) throw ShapeError("morphism argument has wrong size");
    return fn_(jet::constant(a, 0)).value;
  }
  Jet operator()(const Jet& a) const { return fn_(a); }

  /// Induced algebra morphism: d/dt phi(exp(tX)) at t = 0.
  Matrix induced(const Matrix& x) const {
    if (x.rows() != n_ || x.cols() != n_) throw ShapeError("algebra element has wrong size");
    Jet curve;
    curve.value = Matrix::Zero(n_, n_);
    curve.tangents = {x};
    return fn_(expm_jet(curve)).tangents.front();
  }

 private:
  int n_ = 0;
  int m_ = 0;
  JetFn fn_;
  std::optional<Expr> source_;
};

inline Matrix induced_algebra_morphism(const GroupMorphism& phi, const Matrix& x) { return phi.induced(x); }

/// outer after inner.
inline GroupMorphism compose(GroupMorphism outer, GroupMorphism inner) {
  if (outer.source_dim() != inner.target_dim()) throw ShapeError("morphism composition: dimension mismatch");
  const int n = inner.source_dim(), m = outer.target_dim();
  return GroupMorphism(n, m, [outer = std::move(outer), inner = std::move(inner)](const Jet& a) {
    return outer(inner(a));
  });
}

/// The field x -> phi(f(x)).
inline MatrixField apply(GroupMorphism phi, MatrixField f) {
  return MatrixField([phi = std::move(phi), f = std::move(f)](const Vector& x, std::span<const Vector> s) {
    return phi(f.jet(x, s));
  });
}

/// Random element exp(sum c_i X_i) with c_i uniform in [-scale, scale]. Without
/// a generator basis the exponent is a random n x n matrix.
inline Matrix random_group_element(int n, const std::vector<Matrix>& generators, Rng& rng, double scale = 1.0) {
  Matrix x = Matrix::Zero(n, n);
  if (generators.empty()) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) x(r, c) = rng.uniform(-scale, scale);
  } else {
    for (const auto& g : generators) x += rng.uniform(-scale, scale) * g;
  }
  return exp_matrix(x);
}

inline Matrix random_algebra_element(int n, const std::vector<Matrix>& generators, Rng& rng, double scale = 1.0) {
  Matrix x = Matrix::Zero(n, n);
  if (generators.empty()) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) x(r, c) = rng.uniform(-scale, scale);
  } else {
    for (const auto& g : generators) x += rng.uniform(-scale, scale) * g;
  }
  return x;
}

/// Largest ||phi(ab) - phi(a)phi(b)|| and ||phi(I) - I|| over `pairs` random pairs.
inline double homomorphism_defect(const GroupMorphism& phi, const std::vector<Matrix>& generators, int pairs,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const int n = phi.source_dim();
  double worst = (phi(Matrix::Identity(n, n)) - Matrix::Identity(phi.target_dim(), phi.target_dim())).norm();
  for (int i = 0; i < pairs; ++i) {
    const Matrix a = random_group_element(n, generators, rng);
    const Matrix b = random_group_element(n, generators, rng);
    worst = std::max(worst, (phi(a * b) - phi(a) * phi(b)).norm());
  }
  return worst;
}

}  // namespace lcf
