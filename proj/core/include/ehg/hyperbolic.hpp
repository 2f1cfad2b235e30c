#pragma once

#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

#include "ehg/autodiff.hpp"
#include "ehg/error.hpp"
#include "ehg/matrix.hpp"

/// Poincare-ball model of hyperbolic space with curvature -c.
///
/// The kernels in this header are templates over the scalar type so that the
/// same code runs on doubles and on ad::Var during training. The typed
/// wrappers (Curvature, ManifoldPoint, TangentVector) validate their inputs;
/// the kernels assume valid input and only project their output.
namespace ehg::hyperbolic {

/// Outputs are kept at radius <= (1 - kBoundaryEps) / sqrt(c).
inline constexpr double kBoundaryEps = 1e-5;

namespace detail {

// tanh(sqrt(w)) / sqrt(w) and its derivative in w, for w >= 0.
inline double tanh_sqrt_ratio(double w) {
  if (w < 1e-4) return 1.0 + w * (-1.0 / 3.0 + w * (2.0 / 15.0 - w * 17.0 / 315.0));
  const double z = std::sqrt(w);
  return std::tanh(z) / z;
}
inline double tanh_sqrt_ratio_deriv(double w) {
  if (w < 1e-4) return -1.0 / 3.0 + w * (4.0 / 15.0 - w * 51.0 / 315.0);
  const double z = std::sqrt(w);
  const double t = std::tanh(z);
  return ((1.0 - t * t) * z - t) / (z * z) / (2.0 * z);
}

// atanh(sqrt(u)) / sqrt(u) and its derivative in u, for 0 <= u < 1.
inline double atanh_sqrt_ratio(double u) {
  if (u < 1e-4) return 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u * (1.0 / 7.0 + u / 9.0)));
  const double z = std::sqrt(u);
  return std::atanh(z) / z;
}
inline double atanh_sqrt_ratio_deriv(double u) {
  if (u < 1e-4) return 1.0 / 3.0 + u * (2.0 / 5.0 + u * (3.0 / 7.0 + u * 4.0 / 9.0));
  const double z = std::sqrt(u);
  return (z / (1.0 - u) - std::atanh(z)) / u / (2.0 * z);
}

template <typename T>
T tanh_sqrt_ratio(const T& w) {
  if constexpr (std::is_same_v<T, double>) {
    return tanh_sqrt_ratio(w);
  } else {
    return T::unary(w, tanh_sqrt_ratio(w.value()), tanh_sqrt_ratio_deriv(w.value()));
  }
}

template <typename T>
T atanh_sqrt_ratio(const T& u) {
  if constexpr (std::is_same_v<T, double>) {
    return atanh_sqrt_ratio(u);
  } else {
    return T::unary(u, atanh_sqrt_ratio(u.value()), atanh_sqrt_ratio_deriv(u.value()));
  }
}

}  // namespace detail

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
T squared_norm(std::span<const T> a) {
  return dot(a, a);
}

/// Rescales x onto radius (1 - eps) / sqrt(c) when it lies at or beyond it.
template <typename T>
std::vector<T> project(std::vector<T> x, const T& c, double eps = kBoundaryEps) {
  const T sq = squared_norm<T>(x);
  const double limit = (1.0 - eps) * (1.0 - eps) / ad::value(c);
  if (ad::value(sq) >= limit) {
    using std::sqrt;
    using ad::sqrt;
    const T scale = (1.0 - eps) / sqrt(c * sq);
    for (auto& v : x) v = v * scale;
  }
  return x;
}

/// Gyrovector addition x (+)_c y.
template <typename T>
std::vector<T> mobius_add(std::span<const T> x, std::span<const T> y, const T& c) {
  const T xy = dot(x, y);
  const T x2 = squared_norm(x);
  const T y2 = squared_norm(y);
  const T a = 1.0 + 2.0 * c * xy + c * y2;
  const T b = 1.0 - c * x2;
  const T den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (a * x[i] + b * y[i]) / den;
  return project(std::move(out), c);
}

/// W (x)_c x = tanh(|Wx| / |x| artanh(sqrt(c) |x|)) Wx / (sqrt(c) |Wx|), written
/// through the two ratio functions so it stays smooth at x = 0 and Wx = 0.
template <typename T>
std::vector<T> mobius_matvec(const MatrixView<T>& w, std::span<const T> x, const T& c) {
  if (w.cols != x.size()) throw ParameterError("mobius_matvec: dimension mismatch");
  std::vector<T> mx(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) mx[r] = dot(w.row(r), x);
  const T a = detail::atanh_sqrt_ratio(c * squared_norm(x));
  const T scale = a * detail::tanh_sqrt_ratio(c * squared_norm<T>(mx) * a * a);
  for (auto& v : mx) v = v * scale;
  return project(std::move(mx), c);
}

/// Exponential map at the origin: tanh(sqrt(c) |v| / 2) v / (sqrt(c) |v|).
template <typename T>
std::vector<T> exp_map_origin(std::span<const T> v, const T& c) {
  const T scale = 0.5 * detail::tanh_sqrt_ratio(0.25 * c * squared_norm(v));
  std::vector<T> out(v.begin(), v.end());
  for (auto& e : out) e = e * scale;
  return project(std::move(out), c);
}

/// Logarithmic map at the origin: (2 / sqrt(c)) artanh(sqrt(c) |x|) x / |x|.
template <typename T>
std::vector<T> log_map_origin(std::span<const T> x, const T& c) {
  const T u = c * squared_norm(x);
  if (!(ad::value(u) < 1.0)) throw DomainError("log map: point is not inside the ball");
  const T scale = 2.0 * detail::atanh_sqrt_ratio(u);
  std::vector<T> out(x.begin(), x.end());
  for (auto& e : out) e = e * scale;
  return out;
}

template <typename T>
std::vector<T> exp_map_origin(const std::vector<T>& v, const T& c) {
  return exp_map_origin(std::span<const T>(v), c);
}
template <typename T>
std::vector<T> log_map_origin(const std::vector<T>& x, const T& c) {
  return log_map_origin(std::span<const T>(x), c);
}
template <typename T>
std::vector<T> mobius_add(const std::vector<T>& x, const std::vector<T>& y, const T& c) {
  return mobius_add(std::span<const T>(x), std::span<const T>(y), c);
}

// ---------------------------------------------------------------------------
// Typed API

/// Curvature magnitude c > 0; the space has curvature -c.
class Curvature {
 public:
  explicit Curvature(double c) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("curvature must be positive and finite");
  }
  double value() const { return c_; }
  double radius() const { return 1.0 / std::sqrt(c_); }
  friend bool operator==(Curvature, Curvature) = default;

 private:
  double c_;
};

/// Point strictly inside the ball of radius 1 / sqrt(c).
struct ManifoldPoint {
  std::vector<double> coords;
  Curvature c;

  static ManifoldPoint origin(std::size_t dim, Curvature c) { return {std::vector<double>(dim), c}; }
  std::size_t dim() const { return coords.size(); }
};

/// Tangent vector at the origin.
struct TangentVector {
  std::vector<double> coords;
};

/// Throws DomainError unless c |x|^2 < 1.
void check_inside(const ManifoldPoint& x);

/// 2 / (1 - c |x|^2).
double conformal_factor(const ManifoldPoint& x);

ManifoldPoint mobius_add(const ManifoldPoint& x, const ManifoldPoint& y);
ManifoldPoint mobius_neg(const ManifoldPoint& x);
ManifoldPoint mobius_matvec(const Matrix& w, const ManifoldPoint& x);
ManifoldPoint exp_map_origin(const TangentVector& v, Curvature c);
TangentVector log_map_origin(const ManifoldPoint& x);

/// (2 / sqrt(c)) artanh(sqrt(c) |(-x) (+)_c y|).
double distance(const ManifoldPoint& x, const ManifoldPoint& y);

/// lambda_c(at)^2 <u, v>.
double inner_product(const TangentVector& u, const TangentVector& v, const ManifoldPoint& at);

ManifoldPoint project_to_ball(std::vector<double> x, Curvature c, double boundary_eps = kBoundaryEps);

}  // namespace ehg::hyperbolic
