#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "ballrl/feature_vector.hpp"

namespace ballrl {

struct Ball {
  double radius = 0.0;
  bool operator==(const Ball&) const = default;
};

struct Box {
  double half_width = 0.0;
  bool operator==(const Box&) const = default;
};

// Axis-aligned only.
struct Ellipsoid {
  std::vector<double> semi_axes;
  bool operator==(const Ellipsoid&) const = default;
};

enum class ShapeKind { Ball, Box, Ellipsoid };

std::string_view to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(std::string_view name);

/// A regular convex action set centred at the origin: B_2(inner) ⊆ set ⊆ B_2(outer).
///
/// Every shape is symmetric about the origin, so min_a <a, θ> = -support_value(θ).
class ActionSet {
 public:
  using Shape = std::variant<Ball, Box, Ellipsoid>;

  static ActionSet ball(std::size_t dim, double radius);
  static ActionSet box(std::size_t dim, double half_width);
  static ActionSet ellipsoid(std::vector<double> semi_axes);

  std::size_t dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  ShapeKind kind() const { return static_cast<ShapeKind>(shape_.index()); }

  /// Radius of the largest inscribed L2 ball (ρ).
  double inner_radius() const;
  /// Radius of the smallest circumscribed L2 ball (η).
  double outer_radius() const;
  /// B = η / ρ.
  double regularity() const { return outer_radius() / inner_radius(); }

  bool operator==(const ActionSet&) const = default;

 private:
  ActionSet(std::size_t dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {}

  std::size_t dim_ = 0;
  Shape shape_;
};

// Relative slack on closed-set membership so that closed-form boundary points
// survive floating-point rounding.
inline constexpr double kMembershipSlack = 1e-12;

bool contains(const ActionSet& set, const FeatureVector& a);

/// max_{a in set} <a, θ>.
double support_value(const ActionSet& set, const FeatureVector& theta);

/// A maximiser of <a, θ> over the set. θ = 0 gives the zero action; a zero
/// coordinate of θ gives a zero coordinate for boxes.
FeatureVector support_argmax(const ActionSet& set, const FeatureVector& theta);

/// The point where the ray through `direction` leaves the set. `direction` must be nonzero.
FeatureVector boundary_point(const ActionSet& set, const FeatureVector& direction);

}  // namespace ballrl
