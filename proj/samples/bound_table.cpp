// Prints B(t, d) on a small grid and the fitted front speed.
#include <cstdio>
#include <vector>

#include "lrcone/velocity.hpp"

int main() {
  lrcone::Couplings c;  // g = J = 0.5
  lrcone::DpWalkCounts counts(256, 45);

  std::vector<double> ts{0.5, 1, 2, 4, 8};
  std::vector<int> ds{2, 4, 8, 16};
  auto grid = lrcone::evaluate_grid(ts, ds, c, counts);
  std::printf("%6s", "t\\d");
  for (int d : ds) std::printf("%14d", d);
  std::printf("\n");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::printf("%6g", ts[i]);
    for (std::size_t j = 0; j < ds.size(); ++j) std::printf("%14.6e", grid[i * ds.size() + j].value);
    std::printf("\n");
  }

  lrcone::VelocityConfig cfg;
  cfg.couplings = c;
  auto rep = lrcone::measure_velocity(cfg, counts);
  std::printf("\nv = %.6f  (c = %.6f, v_lr = %.6f)\n", rep.fit.v, c.light_speed(), rep.kappa.v_lr);
  std::printf("xi = %.6f  A = %.6f\n", rep.fit.xi, rep.fit.A);
}
