#include "ehg/hyperbolic.hpp"

namespace ehg::hyperbolic {
namespace {

void check_same_curvature(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (!(x.c == y.c)) throw DomainError("points live on balls of different curvature");
  if (x.dim() != y.dim()) throw ParameterError("points have different dimensions");
}

}  // namespace

void check_inside(const ManifoldPoint& x) {
  if (!(x.c.value() * squared_norm<double>(x.coords) < 1.0)) {
    throw DomainError("point is on or outside the ball boundary");
  }
}

double conformal_factor(const ManifoldPoint& x) {
  check_inside(x);
  return 2.0 / (1.0 - x.c.value() * squared_norm<double>(x.coords));
}

ManifoldPoint mobius_add(const ManifoldPoint& x, const ManifoldPoint& y) {
  check_same_curvature(x, y);
  return {mobius_add<double>(x.coords, y.coords, x.c.value()), x.c};
}

ManifoldPoint mobius_neg(const ManifoldPoint& x) {
  ManifoldPoint out = x;
  for (auto& v : out.coords) v = -v;
  return out;
}

ManifoldPoint mobius_matvec(const Matrix& w, const ManifoldPoint& x) {
  return {mobius_matvec<double>(w.view(), x.coords, x.c.value()), x.c};
}

ManifoldPoint exp_map_origin(const TangentVector& v, Curvature c) {
  for (double e : v.coords) {
    if (!std::isfinite(e)) throw DomainError("tangent vector has a non-finite component");
  }
  return {exp_map_origin<double>(v.coords, c.value()), c};
}

TangentVector log_map_origin(const ManifoldPoint& x) {
  check_inside(x);
  return {log_map_origin<double>(x.coords, x.c.value())};
}

double distance(const ManifoldPoint& x, const ManifoldPoint& y) {
  check_same_curvature(x, y);
  const double c = x.c.value();
  const auto diff = mobius_add<double>(mobius_neg(x).coords, y.coords, c);
  return 2.0 / std::sqrt(c) * std::atanh(std::sqrt(c * squared_norm<double>(diff)));
}

double inner_product(const TangentVector& u, const TangentVector& v, const ManifoldPoint& at) {
  if (u.coords.size() != v.coords.size()) throw ParameterError("tangent vectors differ in size");
  const double lambda = conformal_factor(at);
  return lambda * lambda * dot<double>(u.coords, v.coords);
}

ManifoldPoint project_to_ball(std::vector<double> x, Curvature c, double boundary_eps) {
  if (!(boundary_eps > 0.0 && boundary_eps < 1.0)) {
    throw ParameterError("boundary_eps must lie in (0, 1)");
  }
  return {project<double>(std::move(x), c.value(), boundary_eps), c};
}

}  // namespace ehg::hyperbolic
