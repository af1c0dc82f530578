#pragma once

#include <vector>

namespace intragen {

// Forward-noising coefficient table: alpha_bar[0] == 1 exactly, strictly
// decreasing, alpha_bar[T] ~ 0. Linear betas; the defaults give
// alpha_bar[200] ~ 3e-5.
struct NoiseSchedule {
    int steps = 0;                  // T
    std::vector<double> betas;      // betas[t] for t in 1..T (index 0 unused)
    std::vector<double> alpha_bar;  // alpha_bar[0..T]
};

NoiseSchedule make_linear_schedule(int steps = 200, double beta_start = 5e-4,
                                   double beta_end = 0.1);

}  // namespace intragen
