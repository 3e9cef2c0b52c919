#pragma once

// Fixed-size 2D vector and 2x2 matrix types used throughout the library.
// Everything in this project lives in two dimensions, so closed forms are
// used instead of a general linear-algebra package.

#include <array>
#include <cmath>

namespace incompat {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// Scalar cross product a ∧ b.
constexpr double wedge(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
/// Counter-clockwise quarter turn.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  constexpr Mat2() = default;
  constexpr Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double s, double t) { return {s, 0.0, 0.0, t}; }
  /// Matrix whose columns are u and v.
  static constexpr Mat2 from_columns(const Vec2& u, const Vec2& v) { return {u.x, v.x, u.y, v.y}; }
  static Mat2 rotation(double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    return {cs, -sn, sn, cs};
  }

  constexpr Vec2 col0() const { return {a, c}; }
  constexpr Vec2 col1() const { return {b, d}; }

  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  constexpr Mat2 inverse() const {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  /// Gradient of det with respect to the entries (the cofactor matrix).
  constexpr Mat2 cofactor() const { return {d, -c, -b, a}; }
  constexpr double frob2() const { return a * a + b * b + c * c + d * d; }
  double frob() const { return std::sqrt(frob2()); }

  constexpr Mat2& operator+=(const Mat2& o) { a += o.a; b += o.b; c += o.c; d += o.d; return *this; }
  constexpr Mat2& operator-=(const Mat2& o) { a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this; }
  constexpr Mat2& operator*=(double s) { a *= s; b *= s; c *= s; d *= s; return *this; }

  friend constexpr Mat2 operator+(Mat2 m, const Mat2& o) { return m += o; }
  friend constexpr Mat2 operator-(Mat2 m, const Mat2& o) { return m -= o; }
  friend constexpr Mat2 operator*(double s, Mat2 m) { return m *= s; }
  friend constexpr Mat2 operator*(Mat2 m, double s) { return m *= s; }
  friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) { return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y}; }
  friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Outer product u vᵀ.
constexpr Mat2 outer(const Vec2& u, const Vec2& v) { return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y}; }

/// Eigen-decomposition of a symmetric 2x2 matrix: eigenvalues l1 >= l2 and a unit eigenvector for l1.
struct SymEigen {
  double l1 = 0.0, l2 = 0.0;
  Vec2 v1;
};

inline SymEigen sym_eigen(const Mat2& s) {
  const double half_tr = 0.5 * (s.a + s.d);
  const double half_diff = 0.5 * (s.a - s.d);
  const double off = 0.5 * (s.b + s.c);
  const double rad = std::hypot(half_diff, off);
  SymEigen e;
  e.l1 = half_tr + rad;
  e.l2 = half_tr - rad;
  // Angle of the leading eigenvector; well defined also when rad == 0.
  const double theta = 0.5 * std::atan2(off, half_diff);
  e.v1 = {std::cos(theta), std::sin(theta)};
  return e;
}

/// f(S) for symmetric S via its eigen-decomposition.
template <class F>
Mat2 sym_apply(const Mat2& s, F&& f) {
  const SymEigen e = sym_eigen(s);
  const Vec2 v2 = perp(e.v1);
  return f(e.l1) * outer(e.v1, e.v1) + f(e.l2) * outer(v2, v2);
}

inline Mat2 sym_sqrt(const Mat2& s) { return sym_apply(s, [](double l) { return std::sqrt(l); }); }
inline Mat2 sym_inv_sqrt(const Mat2& s) { return sym_apply(s, [](double l) { return 1.0 / std::sqrt(l); }); }

/// Singular values of a 2x2 matrix in closed form, with the sign of the determinant.
/// Uses σ1,2 = (|(a+d, c-b)| ± |(a-d, b+c)|)/2, which needs no branch for σ1 = σ2.
struct SingularValues {
  double s1 = 0.0;  ///< largest
  double s2 = 0.0;  ///< smallest, nonnegative
  int det_sign = 0; ///< -1, 0 or +1
};

inline SingularValues singular_values(const Mat2& m) {
  const double sp = std::hypot(m.a + m.d, m.c - m.b);
  const double sm = std::hypot(m.a - m.d, m.b + m.c);
  SingularValues sv;
  sv.s1 = 0.5 * (sp + sm);
  sv.s2 = 0.5 * std::abs(sp - sm);
  const double dt = m.det();
  sv.det_sign = (dt > 0.0) - (dt < 0.0);
  return sv;
}

}  // namespace incompat
