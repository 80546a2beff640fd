#pragma once

// Matrix-valued functions of chart coordinates. A field is either backed by a
// parsed expression or composed from other fields; composites keep exact
// derivatives by propagating jets through products, inverses and pullbacks.

#include <lcf/expr.hpp>

#include <functional>
#include <optional>

namespace lcf {

namespace jet {

inline Jet constant(const Matrix& m, std::size_t order) {
  Jet j;
  j.value = m;
  j.tangents.assign(order, Matrix::Zero(m.rows(), m.cols()));
  return j;
}

inline Jet product(const Jet& a, const Jet& b) { return detail::multiply(a, b); }

inline Jet inverse(const Jet& a) { return detail::inverse(a); }

}  // namespace jet

class MatrixField {
 public:
  using JetFn = std::function<Jet(const Vector&, std::span<const Vector>)>;

  MatrixField() = default;
  explicit MatrixField(JetFn fn, std::optional<Expr> source = std::nullopt)
      : fn_(std::move(fn)), source_(std::move(source)) {}

  static MatrixField from_expr(Expr e, ParamMap params) {
    auto src = e;
    return MatrixField(
        [e = std::move(e), params = std::move(params)](const Vector& x, std::span<const Vector> seeds) {
          return eval_jet(e, x, seeds, params);
        },
        std::move(src));
  }

  static MatrixField constant(Matrix m) {
    return MatrixField([m = std::move(m)](const Vector&, std::span<const Vector> seeds) {
      return jet::constant(m, seeds.size());
    });
  }

  /// A field that only knows its values; asking for derivatives throws.
  static MatrixField value_only(std::function<Matrix(const Vector&)> f) {
    return MatrixField([f = std::move(f)](const Vector& x, std::span<const Vector> seeds) {
      if (!seeds.empty()) throw Error("field carries no derivative information");
      Jet j;
      j.value = f(x);
      return j;
    });
  }

  explicit operator bool() const { return static_cast<bool>(fn_); }

  Matrix operator()(const Vector& x) const { return fn_(x, {}).value; }
  Jet jet(const Vector& x, std::span<const Vector> seeds) const { return fn_(x, seeds); }

  /// Directional derivative along `v`.
  Matrix derivative(const Vector& x, const Vector& v) const {
    const Vector seeds[] = {v};
    return fn_(x, seeds).tangents.front();
  }

  const std::optional<Expr>& source() const { return source_; }

 private:
  JetFn fn_;
  std::optional<Expr> source_;
};

/// Column-vector-valued field used for coordinate changes.
using CoordMap = MatrixField;

inline MatrixField product(MatrixField a, MatrixField b) {
  return MatrixField([a = std::move(a), b = std::move(b)](const Vector& x, std::span<const Vector> s) {
    return jet::product(a.jet(x, s), b.jet(x, s));
  });
}

inline MatrixField inverse(MatrixField a) {
  return MatrixField([a = std::move(a)](const Vector& x, std::span<const Vector> s) { return jet::inverse(a.jet(x, s)); });
}

/// f composed with the coordinate change psi, with chain-rule tangents.
inline MatrixField pullback(MatrixField f, CoordMap psi) {
  return MatrixField([f = std::move(f), psi = std::move(psi)](const Vector& x, std::span<const Vector> s) {
    const Jet y = psi.jet(x, s);
    std::vector<Vector> pushed;
    pushed.reserve(s.size());
    for (const auto& t : y.tangents) pushed.emplace_back(t.col(0));
    Vector yv = y.value.col(0);
    return f.jet(yv, pushed);
  });
}

}  // namespace lcf
