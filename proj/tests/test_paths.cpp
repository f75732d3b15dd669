#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "impulsemc/paths.hpp"
#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace imc;

namespace {

ModelParams default_params() { return ModelParams{}; }

double sample_sd(const double* v, std::size_t n, double mean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (v[i] - mean) * (v[i] - mean);
    return std::sqrt(acc / (static_cast<double>(n) - 1.0));
}

double row_mean(const double* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[i];
    return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("reference bundle starts at the definitions") {
    const auto bundle = simulate_reference(default_params(), {8, 1.0}, 64, 7);
    for (std::size_t i = 0; i < bundle.m_paths; ++i) {
        CHECK(bundle.x_row(0)[i] == 1.0);
        for (std::size_t j = 0; j <= 2; ++j) CHECK(bundle.l_row(j, 0)[i] == 1.0);
        for (std::size_t j = 0; j < 2; ++j) CHECK(bundle.r_row(j, 0)[i] == 0.0);
        CHECK(bundle.zpost_row(0)[i] == 1.0);
    }
}

TEST_CASE("reference bundle invariants: positivity and monotone integrals") {
    const auto bundle = simulate_reference(default_params(), {10, 1.0}, 512, 21);
    for (int k = 0; k <= 10; ++k) {
        for (std::size_t i = 0; i < bundle.m_paths; ++i) {
            CHECK(bundle.x_row(k)[i] > 0.0);
            CHECK(bundle.zpost_row(k)[i] > 0.0);
            for (std::size_t j = 0; j <= 2; ++j) CHECK(bundle.l_row(j, k)[i] > 0.0);
            if (k > 0)
                for (std::size_t j = 0; j < 2; ++j)
                    CHECK(bundle.r_row(j, k)[i] >= bundle.r_row(j, k - 1)[i]);
        }
    }
}

TEST_CASE("likelihood ratios and posterior weights are reference-measure martingales") {
    const std::size_t m = 1 << 14;
    const auto params = default_params();
    const auto bundle = simulate_reference(params, {10, 1.0}, m, 99);
    for (int k = 1; k <= 10; ++k) {
        for (std::size_t j = 0; j <= 2; ++j) {
            const double mean = row_mean(bundle.l_row(j, k), m);
            const double se = sample_sd(bundle.l_row(j, k), m, mean) / std::sqrt(double(m));
            CHECK(std::abs(mean - 1.0) <= 3.0 * se);
        }
        const double mean = row_mean(bundle.zpost_row(k), m);
        const double se = sample_sd(bundle.zpost_row(k), m, mean) / std::sqrt(double(m));
        CHECK(std::abs(mean - 1.0) <= 3.0 * se);
    }
}

TEST_CASE("posterior weighting reproduces physical-measure expectations") {
    // E0[zpost(t) X(t)] = E[X(t)] under the physical measure; the right side
    // comes from the quadrature oracle
    const auto params = default_params();
    const std::size_t m = 1 << 15;
    const auto bundle = simulate_reference(params, {10, 1.0}, m, 71);
    for (int k : {2, 5, 10}) {
        std::vector<double> weighted(m);
        for (std::size_t i = 0; i < m; ++i)
            weighted[i] = bundle.zpost_row(k)[i] * bundle.x_row(k)[i];
        const double mean = row_mean(weighted.data(), m);
        const double se = sample_sd(weighted.data(), m, mean) / std::sqrt(double(m));
        const double want = oracles::physical_mean(params, bundle.grid.t(k));
        CHECK(std::abs(mean - want) <= 3.0 * se);
    }
}

TEST_CASE("posterior probabilities normalize and start at certainty") {
    const auto params = default_params();
    const auto bundle = simulate_reference(params, {10, 1.0}, 256, 5);
    const auto at_zero = posterior_probabilities(bundle, params, 0, 0);
    CHECK(at_zero[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(at_zero[1] == 0.0);
    CHECK(at_zero[2] == 0.0);
    for (std::size_t i = 0; i < bundle.m_paths; i += 17) {
        for (int k = 0; k <= 10; ++k) {
            const auto pi = posterior_probabilities(bundle, params, i, k);
            double sum = 0.0;
            for (double v : pi) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(posterior_probabilities(bundle, params, bundle.m_paths, 0),
                    std::out_of_range);
    CHECK_THROWS_AS(posterior_probabilities(bundle, params, 0, 11), std::out_of_range);
}

TEST_CASE("equal drifts reduce the posterior of no-change to its prior") {
    ModelParams p = default_params();
    p.mus = {p.mu0, p.mu0};
    // fine grid keeps the trapezoid error of the ratio integral ~1e-5
    const TimeGrid grid{64, 1.0};
    const auto bundle = simulate_reference(p, grid, 64, 3);
    for (std::size_t i = 0; i < bundle.m_paths; i += 7) {
        for (int k = 1; k <= grid.n_steps; k += 13) {
            const auto pi = posterior_probabilities(bundle, p, i, k);
            CHECK(pi[0] == doctest::Approx(std::exp(-p.lambda * grid.t(k))).epsilon(1e-4));
        }
    }
}

TEST_CASE("bundles are bit-identical across thread counts and reruns") {
    const auto params = default_params();
    SimOptions one;
    one.threads = 1;
    SimOptions two;
    two.threads = 2;
    const auto a = simulate_reference(params, {10, 1.0}, 3000, 11, one);
    const auto b = simulate_reference(params, {10, 1.0}, 3000, 11, two);
    CHECK(a.x == b.x);
    CHECK(a.zpost == b.zpost);
    for (std::size_t j = 0; j <= 2; ++j) CHECK(a.l[j] == b.l[j]);
    for (std::size_t j = 0; j < 2; ++j) CHECK(a.r[j] == b.r[j]);
    const auto c = simulate_reference(params, {10, 1.0}, 3000, 11, two);
    CHECK(b.x == c.x);
}

TEST_CASE("path prefixes are independent of the path count") {
    const auto params = default_params();
    const auto small = simulate_reference(params, {6, 1.0}, 100, 13);
    const auto big = simulate_reference(params, {6, 1.0}, 400, 13);
    for (int k = 0; k <= 6; ++k)
        for (std::size_t i = 0; i < 100; ++i)
            CHECK(small.x_row(k)[i] == big.x_row(k)[i]);
}

TEST_CASE("ratio integral converges at second order on a smooth path") {
    // deterministic smooth trajectory x(s) = x0 * exp(0.05 s); reference
    // value from fine Simpson quadrature
    const auto params = default_params();
    const double s2 = params.sigma * params.sigma;
    const double u = params.mus[1];
    const double g = 0.5 * (params.mu0 - u - (params.mu0 * params.mu0 - u * u) / s2) -
                     params.lambda;
    const double q = (params.mu0 - u) / s2;
    auto f = [&](double s) {
        return params.lambda * std::exp(g * s) * std::pow(std::exp(0.05 * s), q);
    };
    const double exact = oracles::simpson(f, 0.0, 1.0, 40000);
    auto trapezoid = [&](int n) {
        double acc = 0.0;
        const double dt = 1.0 / n;
        for (int i = 0; i < n; ++i) acc += 0.5 * dt * (f(i * dt) + f((i + 1) * dt));
        return acc;
    };
    const double e1 = std::abs(trapezoid(8) - exact);
    const double e2 = std::abs(trapezoid(16) - exact);
    const double e3 = std::abs(trapezoid(32) - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(1.0));  // within a factor 2
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(1.0));
}

TEST_CASE("substeps refine the ratio integral toward its closed form") {
    // with u = mu0 the integrand is lambda e^{-lambda s} and R has a closed form
    ModelParams p = default_params();
    p.mus = {p.mu0, -0.1};
    const TimeGrid grid{5, 1.0};
    SimOptions coarse;
    SimOptions fine;
    fine.substeps = 8;
    const auto a = simulate_reference(p, grid, 16, 17, coarse);
    const auto b = simulate_reference(p, grid, 16, 17, fine);
    const double exact = 1.0 - std::exp(-p.lambda * 1.0);
    const double err_a = std::abs(a.r_row(0, 5)[0] - exact);
    const double err_b = std::abs(b.r_row(0, 5)[0] - exact);
    CHECK(err_b < err_a);
    CHECK(err_b <= err_a / 16.0);  // ~64x from second order, slack for luck
}

TEST_CASE("physical simulation matches closed-form limits and the mixture mean") {
    TimeGrid grid{10, 1.0};
    const std::size_t m = 1 << 14;

    SUBCASE("immediate change collapses to the post-change drift") {
        ModelParams p = default_params();
        p.lambda = 1e6;
        p.probs = {1.0, 0.0};
        const auto paths = simulate_physical(p, grid, m, 31);
        double acc = 0.0;
        for (const auto& path : paths) acc += std::log(path.x[10]);
        const double mean = acc / m;
        const double want = (p.mus[0] - 0.5 * p.sigma * p.sigma) * 1.0;
        // sd of log X(T) is sigma
        CHECK(std::abs(mean - want) <= 3.0 * p.sigma / std::sqrt(double(m)));
    }

    SUBCASE("no change keeps the pre-change drift") {
        ModelParams p = default_params();
        p.lambda = 1e-9;
        const auto paths = simulate_physical(p, grid, m, 32);
        double acc = 0.0;
        for (const auto& path : paths) acc += std::log(path.x[10]);
        const double mean = acc / m;
        const double want = (p.mu0 - 0.5 * p.sigma * p.sigma) * 1.0;
        CHECK(std::abs(mean - want) <= 3.0 * p.sigma / std::sqrt(double(m)));
    }

    SUBCASE("terminal mean matches the quadrature oracle") {
        const ModelParams p = default_params();
        const auto paths = simulate_physical(p, grid, m, 33);
        double acc = 0.0;
        for (const auto& path : paths) acc += path.x[10];
        const double mean = acc / m;
        double sd = 0.0;
        for (const auto& path : paths) sd += (path.x[10] - mean) * (path.x[10] - mean);
        sd = std::sqrt(sd / (m - 1.0));
        const double want = oracles::physical_mean(p, 1.0);
        CHECK(std::abs(mean - want) <= 3.0 * sd / std::sqrt(double(m)));
    }
}

TEST_CASE("physical paths carry consistent latent variables") {
    const auto params = default_params();
    const auto paths = simulate_physical(params, {10, 1.0}, 200, 41);
    for (const auto& p : paths) {
        CHECK(p.rho >= 0.0);
        CHECK((p.u == params.mus[0] || p.u == params.mus[1]));
        for (double x : p.x) CHECK(x > 0.0);
    }
}

TEST_CASE("simulators reject empty workloads") {
    const auto params = default_params();
    CHECK_THROWS_AS(simulate_reference(params, {10, 1.0}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_physical(params, {10, 1.0}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_reference(params, {0, 1.0}, 16, 1), std::invalid_argument);
}

TEST_CASE("columnar dump has the documented schema") {
    const auto params = default_params();
    const auto bundle = simulate_reference(params, {3, 1.0}, 5, 2);
    std::ostringstream out;
    write_paths_csv(out, bundle);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "path,k,t,x,l0,l1,l2,r1,r2,zpost");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5 * 4);
    CHECK(out.str().find("0,0,0,1,1,1,1,0,0,1\n") != std::string::npos);
}
