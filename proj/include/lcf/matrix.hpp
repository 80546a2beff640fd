#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace lcf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A value together with its directional derivatives, one per seed direction.
/// Scalars are stored as 1x1 matrices with `scalar` set.
struct Jet {
  Matrix value;
  std::vector<Matrix> tangents;
  bool scalar = false;

  double as_scalar() const { return value(0, 0); }
  std::size_t order() const { return tangents.size(); }
};

inline double frobenius(const Matrix& m) { return m.norm(); }

namespace detail {

inline double one_norm(const Matrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Taylor polynomial of degree 18 after scaling to ||A||_1 <= 1/2, then
// repeated squaring. Truncation error at the scaled level is below 1e-22.
inline Matrix expm_scaled(const Matrix& a) {
  const auto n = a.rows();
  int squarings = 0;
  const double norm = one_norm(a);
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = a / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 18; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace detail

/// Matrix exponential by scaling and squaring.
inline Matrix expm(const Matrix& a) {
  if (a.rows() == 0) return a;
  return detail::expm_scaled(a);
}

/// Directional derivative of the exponential at `a` along `e`: the upper right
/// block of exp([[a, e], [0, a]]).
inline Matrix expm_derivative(const Matrix& a, const Matrix& e) {
  const auto n = a.rows();
  Matrix big = Matrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = a;
  big.topRightCorner(n, n) = e;
  big.bottomRightCorner(n, n) = a;
  return expm(big).topRightCorner(n, n);
}

/// Value and derivatives of exp along every tangent of `a`.
inline Jet expm_jet(const Jet& a) {
  Jet out;
  out.value = expm(a.value);
  out.tangents.reserve(a.order());
  for (const auto& t : a.tangents) out.tangents.push_back(expm_derivative(a.value, t));
  return out;
}

}  // namespace lcf
