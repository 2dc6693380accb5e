#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ballrl {

/// Point in R^d. Used for state features, parameters, estimates and actions.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::size_t dim) : coords_(dim, 0.0) {}
  explicit FeatureVector(std::vector<double> coords) : coords_(std::move(coords)) {}
  FeatureVector(std::initializer_list<double> coords) : coords_(coords) {}

  /// scale * e_index
  static FeatureVector basis(std::size_t dim, std::size_t index, double scale = 1.0);

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  const std::vector<double>& values() const { return coords_; }

  FeatureVector& operator+=(const FeatureVector& other);
  FeatureVector& operator-=(const FeatureVector& other);
  FeatureVector& operator*=(double scale);

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> coords_;
};

FeatureVector operator+(FeatureVector lhs, const FeatureVector& rhs);
FeatureVector operator-(FeatureVector lhs, const FeatureVector& rhs);
FeatureVector operator*(double scale, FeatureVector v);

// All binary operations throw DimensionMismatch on unequal lengths.
double dot(const FeatureVector& a, const FeatureVector& b);
double norm2(const FeatureVector& v);
double norm1(const FeatureVector& v);
double norm_inf(const FeatureVector& v);
bool all_finite(const FeatureVector& v);
bool is_zero(const FeatureVector& v);

void require_dim(const FeatureVector& v, std::size_t dim, const char* what);

}  // namespace ballrl
