// Benchmark of the Monte Carlo region kernels: serial reference vs OpenMP,
// plus end-to-end session throughput.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "teamteach/parallel.hpp"
#include "teamteach/study.hpp"

namespace tt = teamteach;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled\n");
#endif

  tt::RandomStream rng(42);
  std::vector<tt::Vec3> normals;
  for (int i = 0; i < 8; ++i) normals.push_back(tt::random_unit_vector(rng));

  std::printf("\n%-28s %12s %12s %12s %8s\n", "kernel", "n", "serial ms",
              "parallel ms", "speedup");
  for (std::size_t n : {100000UL, 1000000UL, 4000000UL}) {
    const tt::SphereSample sample(n, 1);
    volatile std::size_t sink = 0;

    const double t_serial = time_best_of(5, [&] {
      sink = tt::serial::count_satisfying(sample, normals);
    });
    const std::size_t serial_count = sink;
    const double t_par = time_best_of(5, [&] {
      sink = tt::par::count_satisfying(sample, normals);
    });
    if (sink != serial_count) {
      std::printf("MISMATCH in count_satisfying at n=%zu\n", n);
      return 1;
    }
    std::printf("%-28s %12zu %12.3f %12.3f %7.2fx\n", "count_satisfying", n,
                t_serial, t_par, t_serial / t_par);

    std::vector<std::uint8_t> mask_s, mask_p;
    const double tm_serial = time_best_of(5, [&] {
      tt::serial::mask_satisfying(sample, normals, mask_s);
    });
    const double tm_par = time_best_of(5, [&] {
      tt::par::mask_satisfying(sample, normals, mask_p);
    });
    if (mask_s != mask_p) {
      std::printf("MISMATCH in mask_satisfying at n=%zu\n", n);
      return 1;
    }
    std::printf("%-28s %12zu %12.3f %12.3f %7.2fx\n", "mask_satisfying", n,
                tm_serial, tm_par, tm_serial / tm_par);
  }

  {
    std::printf("\nsession throughput (pool 16, 200 particles)\n");
    tt::Config config;
    config.pool.count = 16;
    config.n_particles = 200;
    config.region_samples = 50000;
    config.scoring_samples = 10000;
    const tt::curriculum::StudyAssets assets(
        config.pool, config.ground_truth(), config.gamma, config.horizon,
        config.pool_seed, 99, config.region_samples, config.scoring_samples);
    const auto comp = tt::TeamComposition::parse("NNP");
    const auto t0 = std::chrono::steady_clock::now();
    int periods = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto rec =
          tt::study::run_session(tt::Strategy::Joint, comp, seed, config, assets);
      periods += rec.n_interactions;
    }
    const double total = ms_since(t0);
    std::printf("  4 sessions, %d periods: %.1f ms (%.1f ms/period)\n", periods,
                total, total / std::max(1, periods));
  }
  return 0;
}
