// Serial vs OpenMP timing of the z-grid spectral-radius sampler.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "peer_astab/criterion.hpp"
#include "peer_astab/validate.hpp"

using namespace peer_astab;

namespace {

RealPeerMethod sample_method(std::size_t s) {
  std::vector<Scalar> c;
  for (std::size_t i = 0; i < s; ++i) c.emplace_back(Rational(static_cast<long>(2 * i + 1), static_cast<long>(2 * s)));
  ExactMatrix w0 = ExactMatrix::identity(s);
  for (std::size_t i = 0; i + 1 < s; ++i) w0(i, i + 1) = w0(i + 1, i) = Scalar(Rational(1, 4));
  return to_real(construct_general(NodeSet(std::move(c)), w0, FieldSpec::rational()).method);
}

double best_of(int reps, const RealPeerMethod& m, const SampleGrid& grid, Execution exec, double& rho) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    rho = *sample_spectral_radius(m, grid, exec).max_spectral_radius;
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
  const SampleGrid grid = SampleGrid::parse(argc > 2 ? argv[2] : "re=1e-3:1e3:120,im=1e-3:1e3:120,boundary=400");
  std::printf("grid points %zu, threads %d, best of %d\n", grid.points().size(), omp_get_max_threads(), reps);
  std::printf("%3s %12s %12s %8s %10s\n", "s", "serial_s", "openmp_s", "speedup", "identical");
  for (std::size_t s = 2; s <= 6; ++s) {
    const RealPeerMethod m = sample_method(s);
    double rho_serial = 0, rho_parallel = 0;
    const double ts = best_of(reps, m, grid, Execution::serial, rho_serial);
    const double tp = best_of(reps, m, grid, Execution::parallel, rho_parallel);
    std::printf("%3zu %12.4f %12.4f %8.2f %10s\n", s, ts, tp, ts / tp, rho_serial == rho_parallel ? "yes" : "no");
  }
}
