#pragma once

#include <array>
#include <cmath>
#include <random>

#include "pocketdex/errors.hpp"

namespace pocketdex {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct Mat3 {
  // row-major
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Mat3 identity() { return Mat3{}; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
        r.m[i][j] = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
};

// Proper rigid motion: p -> R*p + t. The rotation must be orthogonal with
// determinant +1 (checked to 1e-8).
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  bool is_valid(double tol = 1e-8) const {
    Mat3 rtr = rotation.transposed() * rotation;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(rtr.m[i][j] - want) > tol) return false;
      }
    return std::abs(rotation.det() - 1.0) <= tol;
  }

  static RigidTransform identity() { return RigidTransform{}; }
};

// Uniform random rotation from a normalized Gaussian quaternion.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double q0 = gauss(rng), q1 = gauss(rng), q2 = gauss(rng), q3 = gauss(rng);
  double n = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
  q0 /= n;
  q1 /= n;
  q2 /= n;
  q3 /= n;
  Mat3 r;
  r.m[0][0] = 1 - 2 * (q2 * q2 + q3 * q3);
  r.m[0][1] = 2 * (q1 * q2 - q0 * q3);
  r.m[0][2] = 2 * (q1 * q3 + q0 * q2);
  r.m[1][0] = 2 * (q1 * q2 + q0 * q3);
  r.m[1][1] = 1 - 2 * (q1 * q1 + q3 * q3);
  r.m[1][2] = 2 * (q2 * q3 - q0 * q1);
  r.m[2][0] = 2 * (q1 * q3 - q0 * q2);
  r.m[2][1] = 2 * (q2 * q3 + q0 * q1);
  r.m[2][2] = 1 - 2 * (q1 * q1 + q2 * q2);
  return r;
}

inline RigidTransform random_rigid_transform(std::mt19937_64& rng, double translation_scale = 5.0) {
  RigidTransform t;
  t.rotation = random_rotation(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  t.translation = {gauss(rng) * translation_scale, gauss(rng) * translation_scale,
                   gauss(rng) * translation_scale};
  return t;
}

}  // namespace pocketdex
