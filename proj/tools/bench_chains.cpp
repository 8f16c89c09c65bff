// Times run_many at several worker counts on one instance and checks that
// every report is bit-identical to the serial run (wall time aside).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cspsamp/formula.hpp"
#include "cspsamp/projection.hpp"
#include "cspsamp/rng.hpp"
#include "cspsamp/sampler.hpp"

using namespace cspsamp;

namespace {

CspFormula random_cnf(int n, int m, uint64_t seed) {
  Rng rng(seed);
  std::vector<AtomicConstraint> cons;
  for (int c = 0; c < m; ++c) {
    AtomicConstraint con;
    std::vector<int32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < 3; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
      con.scope.push_back(pool[i]);
      con.forbidden.push_back(static_cast<Value>(rng.below(2)));
    }
    cons.push_back(con);
  }
  return build_formula(n, std::vector<int32_t>(n, 2), cons);
}

bool same_report(const RunReport& a, const RunReport& b) {
  return a.assignment == b.assignment && a.steps == b.steps &&
         a.giant_exceptions == b.giant_exceptions &&
         a.overflow_exceptions == b.overflow_exceptions && a.trials_total == b.trials_total &&
         a.constraints_scanned == b.constraints_scanned;
}

}  // namespace

int main(int argc, char** argv) {
  int n = 64;
  int chains = 16;
  int64_t T = 4000;
  if (argc > 1) n = std::atoi(argv[1]);
  if (argc > 2) chains = std::atoi(argv[2]);
  if (argc > 3) T = std::atoll(argv[3]);

  const CspFormula formula = random_cnf(n, 2 * n, 987);
  const ProjectionScheme scheme(formula.domain_sizes(), formula.domain_sizes());

  ClassProfile profile;
  profile.cls = InstanceClass::cnf;
  profile.k = 3;
  profile.d = compute_stats(formula).max_var_degree;
  profile.zeta = std::exp2(-20);
  ScheduleOverrides ov;
  ov.T = T;
  const SamplerSchedule schedule = derive_schedule(compute_stats(formula), profile, 0.1,
                                                   SamplerMode::forced, 2024, ov);
  const Sampler sampler(formula, scheme, schedule);

  // thread counts beyond the core count still verify determinism; the
  // speedup column is only meaningful up to the hardware limit
  const std::vector<int> worker_counts = {1, 2, 4};
#ifdef _OPENMP
  std::cout << "cores=" << omp_get_max_threads() << ' ';
#endif
  std::cout << "n=" << n << " chains=" << chains << " T=" << T << '\n';
  std::cout << std::left << std::setw(9) << "workers" << std::setw(12) << "seconds"
            << std::setw(10) << "speedup" << "identical\n";

  std::vector<RunReport> serial;
  double serial_seconds = 0;
  bool all_same = true;
  for (const int w : worker_counts) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<RunReport> reports = sampler.run_many(chains, w);
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();

    bool same = true;
    if (w == 1) {
      serial = reports;
      serial_seconds = seconds;
    } else {
      for (int i = 0; i < chains; ++i) same = same && same_report(serial[i], reports[i]);
      all_same = all_same && same;
    }
    std::cout << std::left << std::setw(9) << w << std::setw(12) << seconds << std::setw(10)
              << (seconds > 0 ? serial_seconds / seconds : 0.0) << (same ? "yes" : "NO")
              << '\n';
  }

  if (!all_same) {
    std::cerr << "parallel reports diverge from the serial run\n";
    return 1;
  }
  return 0;
}
