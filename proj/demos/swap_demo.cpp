// Two agents exchange sides; prints distance to goal and separation.

#include <cstdio>

#include "se3nav/presets.hpp"
#include "se3nav/sim.hpp"

int main() {
  const auto cfg = se3nav::presets::two_agent_swap();
  const auto log = se3nav::run_episode(cfg);
  std::printf("%8s %12s %12s %10s\n", "t", "gamma_0", "gamma_1", "distance");
  for (long k = 0; k <= log.ticks; k += 2000) {
    std::printf("%8.2f %12.4g %12.4g %10.3f\n", k * log.dt, log.sample(k, 0).gamma_d,
                log.sample(k, 1).gamma_d, log.sample(k, 0).min_dist);
  }
}
