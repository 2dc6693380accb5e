#include "ballrl/action_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ballrl/errors.hpp"

namespace ballrl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Ball:
      return "ball";
    case ShapeKind::Box:
      return "box";
    case ShapeKind::Ellipsoid:
      return "ellipsoid";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(std::string_view name) {
  if (name == "ball") return ShapeKind::Ball;
  if (name == "box") return ShapeKind::Box;
  if (name == "ellipsoid") return ShapeKind::Ellipsoid;
  throw ConfigError("unknown action set shape '" + std::string(name) + "'");
}

ActionSet ActionSet::ball(std::size_t dim, double radius) {
  if (dim == 0) throw ConfigError("action set dimension must be at least 1");
  require_positive(radius, "ball radius");
  return ActionSet(dim, Ball{radius});
}

ActionSet ActionSet::box(std::size_t dim, double half_width) {
  if (dim == 0) throw ConfigError("action set dimension must be at least 1");
  require_positive(half_width, "box half-width");
  return ActionSet(dim, Box{half_width});
}

ActionSet ActionSet::ellipsoid(std::vector<double> semi_axes) {
  if (semi_axes.empty()) throw ConfigError("ellipsoid needs at least one semi-axis");
  for (double c : semi_axes) require_positive(c, "ellipsoid semi-axis");
  const std::size_t dim = semi_axes.size();
  return ActionSet(dim, Ellipsoid{std::move(semi_axes)});
}

double ActionSet::inner_radius() const {
  return std::visit(Overloaded{
                        [](const Ball& b) { return b.radius; },
                        [](const Box& b) { return b.half_width; },
                        [](const Ellipsoid& e) {
                          return *std::min_element(e.semi_axes.begin(), e.semi_axes.end());
                        },
                    },
                    shape_);
}

double ActionSet::outer_radius() const {
  return std::visit(Overloaded{
                        [](const Ball& b) { return b.radius; },
                        [this](const Box& b) { return b.half_width * std::sqrt(double(dim_)); },
                        [](const Ellipsoid& e) {
                          return *std::max_element(e.semi_axes.begin(), e.semi_axes.end());
                        },
                    },
                    shape_);
}

bool contains(const ActionSet& set, const FeatureVector& a) {
  require_dim(a, set.dim(), "contains");
  return std::visit(Overloaded{
                        [&](const Ball& b) {
                          double s = 0.0;
                          for (double x : a.coords()) s += x * x;
                          return s <= b.radius * b.radius * (1.0 + 2.0 * kMembershipSlack);
                        },
                        [&](const Box& b) {
                          const double limit = b.half_width * (1.0 + kMembershipSlack);
                          for (double x : a.coords()) {
                            if (!(std::abs(x) <= limit)) return false;
                          }
                          return true;
                        },
                        [&](const Ellipsoid& e) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < a.size(); ++i) {
                            const double q = a[i] / e.semi_axes[i];
                            s += q * q;
                          }
                          return s <= 1.0 + 2.0 * kMembershipSlack;
                        },
                    },
                    set.shape());
}

double support_value(const ActionSet& set, const FeatureVector& theta) {
  require_dim(theta, set.dim(), "support_value");
  return std::visit(Overloaded{
                        [&](const Ball& b) { return b.radius * norm2(theta); },
                        [&](const Box& b) { return b.half_width * norm1(theta); },
                        [&](const Ellipsoid& e) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < theta.size(); ++i) {
                            const double q = e.semi_axes[i] * theta[i];
                            s += q * q;
                          }
                          return std::sqrt(s);
                        },
                    },
                    set.shape());
}

FeatureVector support_argmax(const ActionSet& set, const FeatureVector& theta) {
  require_dim(theta, set.dim(), "support_argmax");
  FeatureVector a(set.dim());
  if (is_zero(theta)) return a;
  std::visit(Overloaded{
                 [&](const Ball& b) {
                   const double scale = b.radius / norm2(theta);
                   for (std::size_t i = 0; i < a.size(); ++i) a[i] = scale * theta[i];
                 },
                 [&](const Box& b) {
                   for (std::size_t i = 0; i < a.size(); ++i) {
                     a[i] = theta[i] > 0.0 ? b.half_width : (theta[i] < 0.0 ? -b.half_width : 0.0);
                   }
                 },
                 [&](const Ellipsoid& e) {
                   const double s = support_value(set, theta);
                   for (std::size_t i = 0; i < a.size(); ++i) {
                     a[i] = e.semi_axes[i] * e.semi_axes[i] * theta[i] / s;
                   }
                 },
             },
             set.shape());
  return a;
}

FeatureVector boundary_point(const ActionSet& set, const FeatureVector& direction) {
  require_dim(direction, set.dim(), "boundary_point");
  if (is_zero(direction)) throw DimensionMismatch("boundary_point: zero direction");
  FeatureVector p = direction;
  std::visit(Overloaded{
                 [&](const Ball& b) { p *= b.radius / norm2(direction); },
                 [&](const Box& b) { p *= b.half_width / norm_inf(direction); },
                 [&](const Ellipsoid& e) {
                   double s = 0.0;
                   for (std::size_t i = 0; i < p.size(); ++i) {
                     const double q = direction[i] / e.semi_axes[i];
                     s += q * q;
                   }
                   p *= 1.0 / std::sqrt(s);
                 },
             },
             set.shape());
  return p;
}

}  // namespace ballrl
