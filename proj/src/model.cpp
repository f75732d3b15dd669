#include "impulsemc/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace imc {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void ModelParams::validate() const {
    require(!mus.empty(), "mus: need at least one post-change drift level");
    require(probs.size() == mus.size(), "probs: must have one mass per drift level");
    double sum = 0.0;
    for (double p : probs) {
        require(p >= 0.0, "probs: masses must be nonnegative");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "probs: masses must sum to 1 within 1e-12");
    require(sigma > 0.0, "sigma: must be strictly positive");
    require(lambda > 0.0, "lambda: must be strictly positive");
    require(horizon > 0.0, "horizon: must be strictly positive");
    require(x0 > 0.0, "x0: must be strictly positive");
}

RewardSpec RewardSpec::gbm_trading() {
    RewardSpec spec;
    auto zero1 = [](double) { return 0.0; };
    spec.h = zero1;
    spec.xi = zero1;
    spec.xi_d1 = zero1;
    spec.xi_d2 = zero1;
    spec.c = [](double x, double z) { return z * x; };
    spec.gamma = [](double, double) { return 0.0; };
    return spec;
}

AugmentedState AugmentedState::initial(const ModelParams& params) {
    AugmentedState y;
    y.t = 0.0;
    y.x = params.x0;
    y.l.assign(params.regimes() + 1, 1.0);
    y.r.assign(params.regimes(), 0.0);
    return y;
}

double posterior_weight(const AugmentedState& state, const ModelParams& params) {
    double w = std::exp(-params.lambda * state.t) * state.l[0];
    for (std::size_t j = 0; j < params.regimes(); ++j)
        w += params.probs[j] * state.l[j + 1] * state.r[j];
    return w;
}

double running_reward(const AugmentedState& state, const ModelParams& params,
                      const RewardSpec& rewards) {
    const double x = state.x;
    const double weight = posterior_weight(state, params);
    // drift-weighted companion: sum_j p_j l_j r_j b(t,x;mu_j) + e^{-lt} l_0 b(t,x;mu_0)
    double drift_weight = std::exp(-params.lambda * state.t) * state.l[0] * params.mu0 * x;
    for (std::size_t j = 0; j < params.regimes(); ++j)
        drift_weight += params.probs[j] * state.l[j + 1] * state.r[j] * params.mus[j] * x;
    const double vol = params.sigma * x;
    return weight * (rewards.h(x) + 0.5 * rewards.xi_d2(x) * vol * vol) +
           drift_weight * rewards.xi_d1(x);
}

double impulse_reward(const AugmentedState& state, double z,
                      const ModelParams& params, const RewardSpec& rewards) {
    const double x = state.x;
    const double jump = rewards.gamma(x, z);
    const double bracket =
        rewards.xi(x + jump) - rewards.xi(x) + rewards.xi_d1(x) * jump + rewards.c(x, z);
    return posterior_weight(state, params) * bracket;
}

kernels::TradeCoeffs trade_payoff_coeffs(const ModelParams& params, double t) {
    if (params.regimes() != 2)
        throw std::invalid_argument("trade_payoff: exactly two post-change regimes required");
    const double s2 = params.sigma * params.sigma;
    auto regime = [&](double u) {
        return std::pair<double, double>{
            std::exp(0.5 * (u - u * u / s2) * t) * std::pow(params.x0, -u / s2),
            1.0 + u / s2};
    };
    kernels::TradeCoeffs c;
    const auto [w0, e0] = regime(params.mu0);
    c.c0 = w0 * std::exp(-params.lambda * t);
    c.e0 = e0;
    const auto [w1, e1] = regime(params.mus[0]);
    c.c1 = params.probs[0] * w1;
    c.e1 = e1;
    const auto [w2, e2] = regime(params.mus[1]);
    c.c2 = params.probs[1] * w2;
    c.e2 = e2;
    return c;
}

double trade_payoff(double t, double x, double r1, double r2, double z,
                    const ModelParams& params) {
    if (x <= 0.0) throw std::domain_error("trade_payoff: x must be strictly positive");
    const auto c = trade_payoff_coeffs(params, t);
    const double lx = std::log(x);
    return z * (c.c0 * std::exp(c.e0 * lx) + c.c1 * std::exp(c.e1 * lx) * r1 +
                c.c2 * std::exp(c.e2 * lx) * r2);
}

InterventionChoice best_intervention(
    const std::function<double(double, const AugmentedState&)>& value_next,
    const AugmentedState& state, const std::vector<double>& z_grid,
    const ModelParams& params, const RewardSpec& rewards) {
    if (z_grid.empty())
        throw std::invalid_argument("best_intervention: z_grid must be nonempty");
    InterventionChoice best;
    AugmentedState jumped = state;
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        const double z = z_grid[i];
        jumped.x = state.x + rewards.gamma(state.x, z);
        const double candidate =
            value_next(state.t, jumped) + impulse_reward(state, z, params, rewards);
        if (i == 0 || candidate > best.value) {
            best.value = candidate;
            best.z_index = i;
        }
    }
    return best;
}

}  // namespace imc
