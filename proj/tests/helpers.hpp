#pragma once

// Shared test scaffolding: fixture paths and random smooth group-valued maps
// written out as expression text.

#include <lcf/expr.hpp>
#include <lcf/field.hpp>
#include <lcf/random.hpp>

#include <string>
#include <vector>

namespace lcf::oracle {

inline std::string fixture(const std::string& name) { return std::string(LCF_FIXTURE_DIR) + "/" + name; }

inline Matrix rotation(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

inline const Matrix& J() {
  static const Matrix j = (Matrix(2, 2) << 0, -1, 1, 0).finished();
  return j;
}

inline std::string literal(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s += r ? ", [" : "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) s += (c ? ", " : "") + detail::format_number(m(r, c));
    s += "]";
  }
  return s + "]";
}

inline Matrix random_matrix(int n, Rng& rng, double scale) {
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

/// Text of a smooth GL(n)-valued map of d coordinates, a product of
/// exponentials of coordinate-dependent random matrices.
inline std::string random_group_map_text(int n, int d, Rng& rng, double scale = 0.4) {
  std::string a = literal(random_matrix(n, rng, scale));
  for (int i = 1; i <= d; ++i) a += " + x" + std::to_string(i) + " * " + literal(random_matrix(n, rng, scale));
  std::string b = "sin(x1) * " + literal(random_matrix(n, rng, scale));
  if (d > 1) b += " + x1 * x2 * " + literal(random_matrix(n, rng, scale));
  return "mexp(" + a + ") * mexp(" + b + ")";
}

inline MatrixField random_group_map(int n, int d, Rng& rng, double scale = 0.4) {
  std::vector<std::string> coords;
  for (int i = 1; i <= d; ++i) coords.push_back("x" + std::to_string(i));
  return MatrixField::from_expr(parse(random_group_map_text(n, d, rng, scale), coords), {});
}

inline Vector random_point(const std::vector<std::pair<double, double>>& box, Rng& rng) {
  Vector x(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) x[static_cast<Eigen::Index>(i)] = rng.uniform(box[i].first, box[i].second);
  return x;
}

inline Vector random_direction(int d, Rng& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

/// Central difference of a matrix field along v.
inline Matrix field_difference(const MatrixField& f, const Vector& x, const Vector& v, double h = 1e-6) {
  return (f(x + h * v) - f(x - h * v)) / (2.0 * h);
}

}  // namespace lcf::oracle
