#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "teamteach/geometry.hpp"

namespace teamteach {

// Plain normals; satisfaction is n . w >= 0. Kernels below take spans of
// these rather than the richer bec types so the serial and OpenMP paths
// stay interchangeable.
using NormalList = std::vector<Vec3>;

// Serial reference implementations. Kept alongside the OpenMP kernels so
// tests can assert exact agreement and the benchmark can compare them.
namespace serial {

std::size_t count_satisfying(const SphereSample& sample,
                             std::span<const Vec3> normals);

// mask[i] = 1 iff sample point i satisfies every normal
void mask_satisfying(const SphereSample& sample, std::span<const Vec3> normals,
                     std::vector<std::uint8_t>& mask);

// points in `mask` (==1) that violate at least one of `normals`
std::size_t count_violations_within(const SphereSample& sample,
                                    const std::vector<std::uint8_t>& mask,
                                    std::span<const Vec3> normals);

}  // namespace serial

namespace par {

std::size_t count_satisfying(const SphereSample& sample,
                             std::span<const Vec3> normals);

void mask_satisfying(const SphereSample& sample, std::span<const Vec3> normals,
                     std::vector<std::uint8_t>& mask);

std::size_t count_violations_within(const SphereSample& sample,
                                    const std::vector<std::uint8_t>& mask,
                                    std::span<const Vec3> normals);

}  // namespace par

}  // namespace teamteach
