#include "teamteach/parallel.hpp"

namespace teamteach {

namespace {

inline bool satisfies_all(double x, double y, double z,
                          std::span<const Vec3> normals) {
  for (const Vec3& n : normals) {
    if (n.x * x + n.y * y + n.z * z < 0.0) return false;
  }
  return true;
}

}  // namespace

namespace serial {

std::size_t count_satisfying(const SphereSample& sample,
                             std::span<const Vec3> normals) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (satisfies_all(xs[i], ys[i], zs[i], normals)) ++count;
  }
  return count;
}

void mask_satisfying(const SphereSample& sample, std::span<const Vec3> normals,
                     std::vector<std::uint8_t>& mask) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  mask.assign(sample.size(), 0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    mask[i] = satisfies_all(xs[i], ys[i], zs[i], normals) ? 1 : 0;
  }
}

std::size_t count_violations_within(const SphereSample& sample,
                                    const std::vector<std::uint8_t>& mask,
                                    std::span<const Vec3> normals) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (mask[i] && !satisfies_all(xs[i], ys[i], zs[i], normals)) ++count;
  }
  return count;
}

}  // namespace serial

namespace par {

// Integer reductions are order-independent, so these give bit-identical
// results for any thread count.

std::size_t count_satisfying(const SphereSample& sample,
                             std::span<const Vec3> normals) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  const std::int64_t n = static_cast<std::int64_t>(sample.size());
  std::size_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (satisfies_all(xs[i], ys[i], zs[i], normals)) ++count;
  }
  return count;
}

void mask_satisfying(const SphereSample& sample, std::span<const Vec3> normals,
                     std::vector<std::uint8_t>& mask) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  const std::int64_t n = static_cast<std::int64_t>(sample.size());
  mask.assign(sample.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    mask[i] = satisfies_all(xs[i], ys[i], zs[i], normals) ? 1 : 0;
  }
}

std::size_t count_violations_within(const SphereSample& sample,
                                    const std::vector<std::uint8_t>& mask,
                                    std::span<const Vec3> normals) {
  const auto& xs = sample.xs();
  const auto& ys = sample.ys();
  const auto& zs = sample.zs();
  const std::int64_t n = static_cast<std::int64_t>(sample.size());
  std::size_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask[i] && !satisfies_all(xs[i], ys[i], zs[i], normals)) ++count;
  }
  return count;
}

}  // namespace par

}  // namespace teamteach
