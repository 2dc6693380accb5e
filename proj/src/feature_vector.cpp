#include "ballrl/feature_vector.hpp"

#include <cmath>
#include <string>

#include "ballrl/errors.hpp"

namespace ballrl {

namespace {

void check_same(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("feature vectors of dimension " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  }
}

}  // namespace

FeatureVector FeatureVector::basis(std::size_t dim, std::size_t index, double scale) {
  if (index >= dim) {
    throw DimensionMismatch("basis index " + std::to_string(index) + " out of range for dimension " +
                            std::to_string(dim));
  }
  FeatureVector v(dim);
  v[index] = scale;
  return v;
}

FeatureVector& FeatureVector::operator+=(const FeatureVector& other) {
  check_same(*this, other);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

FeatureVector& FeatureVector::operator-=(const FeatureVector& other) {
  check_same(*this, other);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

FeatureVector& FeatureVector::operator*=(double scale) {
  for (double& x : coords_) x *= scale;
  return *this;
}

FeatureVector operator+(FeatureVector lhs, const FeatureVector& rhs) { return lhs += rhs; }
FeatureVector operator-(FeatureVector lhs, const FeatureVector& rhs) { return lhs -= rhs; }
FeatureVector operator*(double scale, FeatureVector v) { return v *= scale; }

double dot(const FeatureVector& a, const FeatureVector& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const FeatureVector& v) {
  double s = 0.0;
  for (double x : v.coords()) s += x * x;
  return std::sqrt(s);
}

double norm1(const FeatureVector& v) {
  double s = 0.0;
  for (double x : v.coords()) s += std::abs(x);
  return s;
}

double norm_inf(const FeatureVector& v) {
  double m = 0.0;
  for (double x : v.coords()) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const FeatureVector& v) {
  for (double x : v.coords()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool is_zero(const FeatureVector& v) {
  for (double x : v.coords()) {
    if (x != 0.0) return false;
  }
  return true;
}

void require_dim(const FeatureVector& v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(dim) +
                            ", got " + std::to_string(v.size()));
  }
}

}  // namespace ballrl
