#pragma once

#include <stdexcept>

namespace imc {

// Uniform decision grid t_k = k*T/n, k = 0..n.
struct TimeGrid {
    int n_steps = 10;
    double horizon = 1.0;

    double dt() const { return horizon / n_steps; }
    double t(int k) const { return k * horizon / n_steps; }

    void validate() const {
        if (n_steps < 1) throw std::invalid_argument("n_steps: must be at least 1");
        if (!(horizon > 0.0)) throw std::invalid_argument("horizon: must be strictly positive");
    }
};

}  // namespace imc
