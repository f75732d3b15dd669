#pragma once
// Test-only oracles, independent of the library's solver path.

#include "impulsemc/grid.hpp"
#include "impulsemc/model.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals = 20000) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Physical-measure mean of the state at time t: condition on the change
// time and level, then integrate the exponential prior by quadrature.
inline double physical_mean(const imc::ModelParams& p, double t) {
    const double no_change = std::exp((p.mu0 - p.lambda) * t);
    auto integrand = [&](double s) {
        double mix = 0.0;
        for (std::size_t j = 0; j < p.regimes(); ++j)
            mix += p.probs[j] * std::exp(p.mus[j] * (t - s));
        return p.lambda * std::exp(-p.lambda * s) * std::exp(p.mu0 * s) * mix;
    };
    return p.x0 * (no_change + simpson(integrand, 0.0, t));
}

// Exhaustive +-1 binomial-tree dynamic program for the buy/sell pair under
// the reference measure: the same closed-form payoff and the same
// trapezoidal ratio integrals along every (non-recombining) tree path, but
// exact conditional expectations (each child carries weight 1/2). Stopping
// is allowed at k = 1..n, forced at n. Only practical for small n.
class BinomialTree {
  public:
    BinomialTree(const imc::ModelParams& params, const imc::TimeGrid& grid)
        : p_(params), g_(grid) {
        const double s2 = p_.sigma * p_.sigma;
        for (std::size_t j = 0; j < 2; ++j) {
            const double u = p_.mus[j];
            coef_g_[j] = 0.5 * (p_.mu0 - u - (p_.mu0 * p_.mu0 - u * u) / s2) - p_.lambda;
            coef_q_[j] = (p_.mu0 - u) / s2;
        }
        const Node root{p_.x0, {0.0, 0.0}, {p_.lambda, p_.lambda}};
        value_ = std::max(values(0, root).v2, 0.0);
        sell_mass_.assign(g_.n_steps + 1, 0.0);
        sell_mass_walk(0, root, 1.0);
    }

    double value() const { return value_; }
    double sell_mass(int k) const { return sell_mass_[k]; }

  private:
    struct Node {
        double x;
        std::array<double, 2> r;
        std::array<double, 2> f;  // ratio integrand at this node's time
    };
    struct V {
        double v1, v2;
    };

    double payoff(int k, const Node& node) const {
        return imc::trade_payoff(g_.t(k), node.x, node.r[0], node.r[1], 1.0, p_);
    }

    Node child(int k, const Node& node, double sgn) const {
        const double dt = g_.dt();
        Node c;
        c.x = node.x * std::exp(-0.5 * p_.sigma * p_.sigma * dt +
                                p_.sigma * std::sqrt(dt) * sgn);
        for (std::size_t j = 0; j < 2; ++j) {
            c.f[j] = p_.lambda * std::exp(coef_g_[j] * g_.t(k + 1)) *
                     std::exp(coef_q_[j] * std::log(c.x / p_.x0));
            c.r[j] = node.r[j] + 0.5 * dt * (node.f[j] + c.f[j]);
        }
        return c;
    }

    V values(int k, const Node& node) const {
        if (k == g_.n_steps) return {payoff(k, node), 0.0};
        const V up = values(k + 1, child(k, node, 1.0));
        const V down = values(k + 1, child(k, node, -1.0));
        const V cont{0.5 * (up.v1 + down.v1), 0.5 * (up.v2 + down.v2)};
        if (k == 0) return cont;
        const double imm = payoff(k, node);
        const double v1 = std::max(imm, cont.v1);
        return {v1, std::max(v1 - imm, cont.v2)};
    }

    // reference-measure distribution of the sell rule "stop when the
    // immediate payoff strictly beats the exact continuation"
    void sell_mass_walk(int k, const Node& node, double prob) {
        if (k == g_.n_steps) {
            sell_mass_[k] += prob;
            return;
        }
        const Node up = child(k, node, 1.0);
        const Node down = child(k, node, -1.0);
        if (k >= 1) {
            const double cont =
                0.5 * (values(k + 1, up).v1 + values(k + 1, down).v1);
            if (payoff(k, node) > cont) {
                sell_mass_[k] += prob;
                return;
            }
        }
        sell_mass_walk(k + 1, up, 0.5 * prob);
        sell_mass_walk(k + 1, down, 0.5 * prob);
    }

    imc::ModelParams p_;
    imc::TimeGrid g_;
    std::array<double, 2> coef_g_{}, coef_q_{};
    std::vector<double> sell_mass_;
    double value_ = 0.0;
};

}  // namespace oracles
