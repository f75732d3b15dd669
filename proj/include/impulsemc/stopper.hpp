#pragma once
// Backward induction over stopping times for the buy-then-sell pair.
//
// Pass 1 solves the sell problem: realized payoffs are regressed on the
// basis at each decision date, and a path stops where the immediate payoff
// beats the fitted continuation (ties continue). Pass 2 solves the buy
// problem against pass 1's outcome; where buying is declined the buy time
// is capped at the current sell time, which keeps tau1 <= tau2 path by
// path. Decisions at t_0 are not taken; stopping indices live in 1..n.
//
// The stopping side of pass 2 needs the sell value at the current date.
// By default it uses the measurable estimate max(immediate, fitted pass-1
// continuation); the realized pass-1 payoff (which looks past t_k and
// biases the buy rule) is available behind fitted_v1 = false. Realized
// payoffs always back the value estimate itself.

#include "impulsemc/paths.hpp"
#include "impulsemc/regression.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace imc {

// Regression features fed to the 4-dimensional fit:
//  kMonomial: (1, X, R1, R2)                      -- the default family
//  kPayoff:   (1, F0, F1, F2), the three additive components of the trade
//             payoff; spans the one-step continuation exactly and is kept
//             for comparison runs.
enum class BasisKind { kMonomial, kPayoff };

BasisKind parse_basis(std::string_view name);
const char* basis_name(BasisKind basis);

struct StopperOptions {
    bool itm_filter = false;  // regress/stop only where stopping pays
    bool fitted_v1 = true;    // measurable sell value in the buy rule
    bool short_side = false;  // mirrored pair: sell first, buy back second
    BasisKind basis = BasisKind::kMonomial;
    unsigned threads = 0;
};

struct StoppingResult {
    std::vector<std::int32_t> tau1;  // buy index per path, 1..n
    std::vector<std::int32_t> tau2;  // paired sell index per path, tau1 <= tau2
    double value = 0.0;              // max(mean realized round trip, 0)
    std::vector<double> cont_values; // realized round-trip payoff per path
};

StoppingResult backward_induction(const PathBundle& bundle, const ModelParams& params,
                                  const StopperOptions& opts = {});

// Interval masses of the stopping times; index i: 0 = buy, 1 = sell.
// Entry k-1 covers the interval (t_{k-1}, t_k], k = 1..n.
struct StopDistribution {
    std::array<std::vector<double>, 2> mass_p0;     // reference-measure frequencies
    std::array<std::vector<double>, 2> mass_p;      // zpost-weighted, raw
    std::array<std::vector<double>, 2> mass_p_norm; // mass_p scaled to sum 1
};

StopDistribution stopping_distribution(const StoppingResult& result, const PathBundle& bundle);

// Columns: k,t,buy_mass_p0,sell_mass_p0,buy_mass_p,sell_mass_p
void write_distribution_csv(std::ostream& out, const StopDistribution& dist,
                            const TimeGrid& grid);
StopDistribution read_distribution_csv(std::istream& in);

}  // namespace imc
