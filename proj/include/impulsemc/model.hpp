#pragma once
// Problem definition: drift regimes with an exponential change point,
// reward functions, and the reward transforms that make the problem fully
// observable under the driftless reference measure.
//
// All functions here are pure; they can be called concurrently without
// synchronization.

#include "impulsemc/kernels.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace imc {

struct ModelParams {
    double mu0 = 0.1;                      // drift before the change
    std::vector<double> mus = {0.1, -0.1}; // post-change drift levels
    std::vector<double> probs = {0.5, 0.5};// prior masses of the levels
    double lambda = 1.0;                   // exponential rate of the change time
    double sigma = 0.2;                    // volatility, > 0
    double x0 = 1.0;                       // initial state, > 0
    double horizon = 1.0;                  // terminal time T, > 0

    std::size_t regimes() const { return mus.size(); }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Reward functions of the impulse-control objective. The derivatives of the
// terminal reward are supplied by the caller, not differenced numerically.
struct RewardSpec {
    std::function<double(double)> h;              // running reward
    std::function<double(double)> xi;             // terminal reward
    std::function<double(double)> xi_d1;          // xi'
    std::function<double(double)> xi_d2;          // xi''
    std::function<double(double, double)> c;      // intervention reward c(x, z)
    std::function<double(double, double)> gamma;  // jump size gamma(x, z)

    // The trading preset: h = xi = gamma = 0, c(x,z) = z*x.
    static RewardSpec gbm_trading();
};

// Time, state and sufficient statistics as one point: likelihood-ratio
// values l_0..l_m and weighted ratio integrals r_1..r_m.
struct AugmentedState {
    double t = 0.0;
    double x = 1.0;
    std::vector<double> l;  // size m+1, strictly positive
    std::vector<double> r;  // size m, nonnegative

    static AugmentedState initial(const ModelParams& params);
};

// Posterior weight sum_j p_j l_j r_j + e^{-lambda t} l_0.
double posterior_weight(const AugmentedState& state, const ModelParams& params);

// Reward rate of the absolutely continuous part after the change of
// measure: weight * (h + xi''*sigma(x)^2/2) + drift-weight * xi'.
double running_reward(const AugmentedState& state, const ModelParams& params,
                      const RewardSpec& rewards);

// Reward collected at an intervention of size z after the change of
// measure: weight * (xi(x+gamma) - xi(x) + xi'(x)*gamma + c(x,z)).
double impulse_reward(const AugmentedState& state, double z,
                      const ModelParams& params, const RewardSpec& rewards);

// Closed form of impulse_reward for the trading preset with two post-change
// regimes, as a function of (t, x, r) only. Throws std::domain_error for
// x <= 0 and std::invalid_argument unless exactly two regimes.
double trade_payoff(double t, double x, double r1, double r2, double z,
                    const ModelParams& params);

// Coefficients of trade_payoff at fixed t for batch evaluation.
kernels::TradeCoeffs trade_payoff_coeffs(const ModelParams& params, double t);

// Value and grid position of the best intervention over a finite grid of
// impulse sizes: max_z value_next(t, state-after-jump) + impulse_reward(z).
// Ties resolve to the smallest grid index.
struct InterventionChoice {
    double value = 0.0;
    std::size_t z_index = 0;
};

InterventionChoice best_intervention(
    const std::function<double(double, const AugmentedState&)>& value_next,
    const AugmentedState& state, const std::vector<double>& z_grid,
    const ModelParams& params, const RewardSpec& rewards);

}  // namespace imc
