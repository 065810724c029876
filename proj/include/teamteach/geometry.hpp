#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "teamteach/rng.hpp"

namespace teamteach {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool operator==(const Vec3& o) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
  return v * (1.0 / n);
}

inline bool is_unit(const Vec3& v, double tol = 1e-9) {
  return std::abs(norm(v) - 1.0) <= tol;
}

// angle between unit vectors, in [0, pi]
inline double geodesic(const Vec3& a, const Vec3& b) {
  double d = dot(a, b);
  if (d > 1.0) d = 1.0;
  if (d < -1.0) d = -1.0;
  return std::acos(d);
}

inline Vec3 random_unit_vector(RandomStream& rng) {
  while (true) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return v * (1.0 / n);
  }
}

// Quasi-uniform point set on the unit sphere: Fibonacci lattice rotated by a
// seeded random rotation. Stored as structure-of-arrays for the counting
// kernels. One instance is built per session and shared by every Monte Carlo
// region test in it, so area estimates are comparable across periods.
class SphereSample {
 public:
  SphereSample(std::size_t n, std::uint64_t seed) : xs_(n), ys_(n), zs_(n) {
    if (n == 0) throw std::invalid_argument("SphereSample needs n > 0");
    RandomStream rng(derive_seed(seed, 0x5b4e7ec0deULL));
    // random rotation from two unit vectors (Gram-Schmidt frame)
    const Vec3 a = random_unit_vector(rng);
    Vec3 b = random_unit_vector(rng);
    b = b - a * dot(a, b);
    while (norm(b) < 1e-9) {
      b = random_unit_vector(rng);
      b = b - a * dot(a, b);
    }
    b = normalized(b);
    const Vec3 c{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
                 a.x * b.y - a.y * b.x};

    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - zi * zi));
      const double phi = golden * static_cast<double>(i);
      const Vec3 p{r * std::cos(phi), r * std::sin(phi), zi};
      const Vec3 q = a * p.x + b * p.y + c * p.z;
      xs_[i] = q.x;
      ys_[i] = q.y;
      zs_[i] = q.z;
    }
  }

  std::size_t size() const { return xs_.size(); }
  Vec3 point(std::size_t i) const { return {xs_[i], ys_[i], zs_[i]}; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& zs() const { return zs_; }

 private:
  std::vector<double> xs_, ys_, zs_;
};

}  // namespace teamteach
