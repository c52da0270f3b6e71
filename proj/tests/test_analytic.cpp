#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "aoinet/analytic.hpp"

using namespace aoinet;

namespace {

// Single-class oracle: E[(T - Y)^+ Y] with T ~ Exp(mu - lambda) the previous
// packet's system time and Y ~ Exp(lambda) the interarrival, integrated by
// composite Simpson over y in [0, 60 / min rate].
double single_class_wa_quadrature(double lambda, double mu)
{
    const double tail_rate = mu - lambda;
    auto f = [&](double y) { return y * lambda * std::exp(-lambda * y) * std::exp(-tail_rate * y) / tail_rate; };
    const double upper = 60.0 / std::min(lambda, tail_rate);
    const int steps = 200000;
    const double h = upper / steps;
    double s = f(0.0) + f(upper);
    for (int i = 1; i < steps; ++i)
        s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

PathLoads two_class_path(double own, double other, double mu_in, double mu_out)
{
    PathLoads p;
    p.lambda = own;
    p.nodes = {{1, mu_in, own / mu_in, own / mu_in}, {3, mu_out, (own + other) / mu_out, own / mu_out}};
    return p;
}

} // namespace

TEST_CASE("waiting_arrival_correlation")
{
    CHECK(waiting_arrival_correlation(0.3, 0.6, 1.0) == doctest::Approx(3.221574344023324).epsilon(1e-13));
    CHECK(waiting_arrival_correlation(0.5, 0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(waiting_arrival_correlation(0.46, 0.46, 1.0) == doctest::Approx(0.46 / 0.54).epsilon(1e-15));
    // Scaling in the service rate is 1 / mu^2.
    CHECK(waiting_arrival_correlation(0.3, 0.6, 2.0) == doctest::Approx(3.221574344023324 / 4.0).epsilon(1e-13));

    SUBCASE("single-class case matches quadrature")
    {
        for (double lambda : {0.1, 0.46, 0.5, 0.8}) {
            const double expected = single_class_wa_quadrature(lambda, 1.0);
            CHECK(waiting_arrival_correlation(lambda, lambda, 1.0) == doctest::Approx(expected).epsilon(1e-9));
        }
    }

    SUBCASE("domain errors")
    {
        CHECK_THROWS_AS(waiting_arrival_correlation(0.5, 1.0, 1.0), DomainError);
        CHECK_THROWS_AS(waiting_arrival_correlation(0.5, 1.2, 1.0), DomainError);
        CHECK_THROWS_AS(waiting_arrival_correlation(0.0, 0.5, 1.0), DomainError);
        CHECK_THROWS_AS(waiting_arrival_correlation(0.6, 0.5, 1.0), DomainError);
        CHECK_THROWS_AS(waiting_arrival_correlation(0.5, 1.0 - 1e-13, 1.0), DomainError);
        CHECK_NOTHROW(waiting_arrival_correlation(0.5, 0.99, 1.0));
    }
}

TEST_CASE("sojourn_interdeparture_product")
{
    const auto one = homogeneous_path(1, 0.5, 1.0);
    CHECK(sojourn_interdeparture_product(one) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sojourn_interdeparture_product(homogeneous_path(2, 0.5, 1.0)) ==
          doctest::Approx(2.0 * sojourn_interdeparture_product(one)).epsilon(1e-15));
    CHECK(sojourn_interdeparture_product(two_class_path(0.3, 0.3, 1.0, 1.0)) ==
          doctest::Approx(10.316812439261419).epsilon(1e-13));
}

TEST_CASE("PathLoads validation")
{
    PathLoads p = homogeneous_path(2, 0.5, 1.0);
    CHECK_NOTHROW(p.validate());
    p.nodes[1].rho_class = 0.4; // rate not conserved
    CHECK_THROWS_AS(p.validate(), DomainError);
    CHECK_THROWS_AS(homogeneous_path(0, 0.5, 1.0), DomainError);
    PathLoads empty;
    empty.lambda = 1.0;
    CHECK_THROWS_AS(empty.validate(), DomainError);
}

TEST_CASE("path_loads from a network")
{
    NetworkSpec net{{{1, 1.0}, {2, 1.0}, {3, 1.0}}, {{"alpha", 0.3, {1, 3}}, {"beta", 0.3, {2, 3}}}};
    auto loads = path_loads(net, solve_traffic(net), "alpha");
    REQUIRE(loads.nodes.size() == 2);
    CHECK(loads.nodes[0].node == 1);
    CHECK(loads.nodes[1].node == 3);
    CHECK(loads.nodes[1].rho == doctest::Approx(0.6));
    CHECK(loads.nodes[1].rho_class == 0.3);
    CHECK_THROWS_AS(path_loads(net, solve_traffic(net), "gamma"), DomainError);
}

TEST_CASE("age_path")
{
    SUBCASE("two-class output path")
    {
        auto r = age_path(two_class_path(0.3, 0.3, 1.0, 1.0));
        CHECK(r.h == doctest::Approx(6.43).epsilon(0.005 / 6.43));
        CHECK(r.h == doctest::Approx(6.428377065111759).epsilon(1e-13));
        CHECK(r.peak_extended);
    }
    SUBCASE("tandem of two at the minimizing load")
    {
        CHECK(age_path(homogeneous_path(2, 0.46, 1.0)).h == doctest::Approx(4.957616747181964).epsilon(1e-13));
    }
    SUBCASE("single queue matches the classic M/M/1 FCFS age")
    {
        auto r = age_path(homogeneous_path(1, 0.5, 1.0));
        CHECK(r.h == doctest::Approx(3.5).epsilon(1e-15));
        CHECK(r.h_left == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(r.h_right == doctest::Approx(5.5).epsilon(1e-15));
        CHECK(r.e_sd == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(r.peak == doctest::Approx(4.0).epsilon(1e-15));
        CHECK_FALSE(r.peak_extended);
        for (double rho : {0.1, 0.3, 0.7, 0.9}) {
            const double classic = 1.0 + 1.0 / rho + rho * rho / (1.0 - rho);
            CHECK(age_path(homogeneous_path(1, rho, 1.0)).h == doctest::Approx(classic).epsilon(1e-13));
        }
    }
    SUBCASE("per-node terms rebuild h")
    {
        auto loads = two_class_path(0.2, 0.5, 1.3, 0.9);
        auto r = age_path(loads);
        REQUIRE(r.per_node_terms.size() == 2);
        double sum = 1.0 / loads.lambda;
        for (const auto& t : r.per_node_terms)
            sum += t.waiting_term + t.service_term;
        CHECK(sum == doctest::Approx(r.h).epsilon(1e-13));
        CHECK(r.per_node_terms[0].node == 1);
        CHECK(r.per_node_terms[1].service_term == doctest::Approx(1.0 / 0.9));
    }
}

TEST_CASE("tandem_age")
{
    CHECK(tandem_age(1, 0.53, 1.0) == doctest::Approx(3.484452027298274).epsilon(1e-13));
    CHECK(tandem_age(10, 0.99, 1.0) - tandem_age(1, 0.99, 1.0) == doctest::Approx(891.09).epsilon(1e-9));
    CHECK(tandem_age(2, 0.46, 1.0) == doctest::Approx(4.957616747181964).epsilon(1e-13));
    CHECK_THROWS_AS(tandem_age(1, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(tandem_age(1, 1.5, 1.0), DomainError);
    CHECK_THROWS_AS(tandem_age(0, 0.5, 1.0), DomainError);
}

TEST_CASE("two_class_ages")
{
    auto ages = two_class_ages(0.3, 0.3, 1.0, 1.0, 1.0);
    CHECK(ages.alpha == doctest::Approx(6.43).epsilon(0.005 / 6.43));
    CHECK(ages.beta == doctest::Approx(ages.alpha).epsilon(1e-15));
    CHECK(two_class_ages(0.46, 1e-9, 1.0, 1.0, 1.0).alpha == doctest::Approx(4.9576).epsilon(1e-5));

    auto ab = two_class_ages(0.2, 0.35, 1.1, 0.8, 1.7);
    auto ba = two_class_ages(0.35, 0.2, 0.8, 1.1, 1.7);
    CHECK(ab.alpha == doctest::Approx(ba.beta).epsilon(1e-15));
    CHECK(ab.beta == doctest::Approx(ba.alpha).epsilon(1e-15));

    CHECK_THROWS_AS(two_class_ages(1.0, 0.1, 1.0, 1.0, 2.0), DomainError);
    CHECK_THROWS_AS(two_class_ages(0.1, 1.0, 1.0, 1.0, 2.0), DomainError);
    CHECK_THROWS_AS(two_class_ages(0.6, 0.6, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(two_class_ages(0.0, 0.6, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("peak_age_path")
{
    CHECK(peak_age_path(homogeneous_path(1, 0.5, 1.0)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(peak_age_path(homogeneous_path(2, 0.46, 1.0)) == doctest::Approx(1 / 0.46 + 2 / 0.54).epsilon(1e-15));
    // Single queue: E[A] + E[S] with E[S] = 1 / (mu - lambda).
    CHECK(peak_age_path(homogeneous_path(1, 0.3, 2.0)) == doctest::Approx(1 / 0.3 + 1 / 1.7).epsilon(1e-15));
}

TEST_CASE("property: ordering and divergence")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        PathLoads p;
        p.lambda = 0.05 + 2.0 * unit(rng);
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int j = 0; j < n; ++j) {
            const double rho = 0.01 + 0.98 * unit(rng);
            const double mu = p.lambda / (rho * unit(rng) + 1e-3 * rho);
            const double rho_class = p.lambda / mu;
            if (rho_class > rho)
                continue;
            p.nodes.push_back({static_cast<NodeId>(j + 1), mu, rho, rho_class});
        }
        if (p.nodes.empty())
            continue;
        auto r = age_path(p);
        CHECK(r.h_left < r.h);
        CHECK(r.h < r.h_right);
        if (p.nodes.size() == 1)
            CHECK(r.peak <= r.h_right);
    }

    // The additive peak extension is not bounded by h_right on longer paths:
    // for a tandem h_right - peak = 1/lambda - n lambda / mu^2.
    auto tandem = age_path(homogeneous_path(2, 0.8, 1.0));
    CHECK(tandem.h_right - tandem.peak == doctest::Approx(1.0 / 0.8 - 1.6).epsilon(1e-12));
    CHECK(tandem.peak > tandem.h_right);

    double prev = 0.0;
    for (double rho : {0.9, 0.99, 0.999, 0.9999}) {
        const double h = tandem_age(3, rho, 1.0);
        CHECK(h > prev);
        prev = h;
    }
    CHECK(tandem_age(3, 1e-6, 1.0) > 1e5);
}
