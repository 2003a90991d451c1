#pragma once

#include <algorithm>
#include <cmath>

namespace egonet {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm2(const Vec3& v) { return dot(v, v); }

inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Zero vector maps to zero.
inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec3{};
}

inline bool is_finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

// Weighted blend (1-s)*a + s*b: returns a exactly at s=0 and b exactly at s=1.
constexpr Vec3 blend(const Vec3& a, const Vec3& b, double s) { return a * (1.0 - s) + b * s; }

/// Unit quaternion (w, x, y, z) for head / view orientation.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr bool operator==(const Quat&) const = default;

  static Quat from_axis_angle(const Vec3& axis, double radians) {
    const Vec3 a = normalized(axis);
    const double h = 0.5 * radians;
    const double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
  }

  // Orientation whose forward axis (-z) points along `direction`, keeping +y as up where possible.
  static Quat look_along(const Vec3& direction);

  Vec3 rotate(const Vec3& v) const {
    const Vec3 u{x, y, z};
    const Vec3 t = 2.0 * cross(u, v);
    return v + w * t + cross(u, t);
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

inline Quat Quat::look_along(const Vec3& direction) {
  const Vec3 f = normalized(direction);
  const Vec3 from{0.0, 0.0, -1.0};
  const double c = dot(from, f);
  if (c > 1.0 - 1e-12) return {};
  if (c < -1.0 + 1e-12) return {0.0, 0.0, 1.0, 0.0};
  // Yaw first, then pitch, so the camera never rolls.
  const double yaw = std::atan2(-f.x, -f.z);
  const double pitch = std::asin(std::clamp(f.y, -1.0, 1.0));
  const Quat qy = from_axis_angle({0.0, 1.0, 0.0}, yaw);
  const Quat qx = from_axis_angle({1.0, 0.0, 0.0}, pitch);
  return {qy.w * qx.w - qy.x * qx.x - qy.y * qx.y - qy.z * qx.z,
          qy.w * qx.x + qy.x * qx.w + qy.y * qx.z - qy.z * qx.y,
          qy.w * qx.y - qy.x * qx.z + qy.y * qx.w + qy.z * qx.x,
          qy.w * qx.z + qy.x * qx.y - qy.y * qx.x + qy.z * qx.w};
}

}  // namespace egonet
