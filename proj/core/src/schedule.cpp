#include "intragen/schedule.hpp"

#include <stdexcept>

namespace intragen {

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) throw std::invalid_argument("schedule needs at least 1 step");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
        throw std::invalid_argument("betas must satisfy 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.steps = steps;
    s.betas.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    s.alpha_bar.assign(static_cast<std::size_t>(steps) + 1, 1.0);
    double prod = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        const double beta = beta_start + (beta_end - beta_start) * frac;
        s.betas[static_cast<std::size_t>(t)] = beta;
        prod *= (1.0 - beta);
        s.alpha_bar[static_cast<std::size_t>(t)] = prod;
    }
    return s;
}

}  // namespace intragen
