#include "aoinet/analytic.hpp"

#include <cmath>

namespace aoinet {

namespace {

// Loads this close to 1 lose too many digits in 1 - rho.
constexpr double kSaturationGuard = 1e-12;

void check_load(double rho_c, double rho, double mu)
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw DomainError("service rate must be positive");
    if (!(rho_c > 0.0))
        throw DomainError("class load must be positive");
    if (rho_c > rho)
        throw DomainError("class load exceeds node load");
    if (!(1.0 - rho >= kSaturationGuard))
        throw DomainError("node load " + std::to_string(rho) + " is not stable");
}

} // namespace

void PathLoads::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("class rate must be positive");
    if (nodes.empty())
        throw DomainError("empty path");
    for (const auto& n : nodes) {
        check_load(n.rho_class, n.rho, n.mu);
        if (std::abs(n.rho_class * n.mu - lambda) > 1e-9 * lambda)
            throw DomainError("class rate is not conserved at node " + std::to_string(n.node));
    }
}

PathLoads homogeneous_path(int n, double lambda, double mu)
{
    if (n < 1)
        throw DomainError("path length must be at least 1");
    PathLoads loads;
    loads.lambda = lambda;
    for (int j = 1; j <= n; ++j)
        loads.nodes.push_back({static_cast<NodeId>(j), mu, lambda / mu, lambda / mu});
    return loads;
}

PathLoads path_loads(const NetworkSpec& net, const FlowSolution& flow, const std::string& cls)
{
    const ClassSpec* spec = net.find_class(cls);
    if (!spec)
        throw DomainError("unknown class '" + cls + "'");
    PathLoads loads;
    loads.lambda = spec->lambda;
    for (NodeId id : spec->itinerary)
        loads.nodes.push_back({id, net.find_node(id)->mu, flow.node_load.at(id), flow.class_load(cls, id)});
    return loads;
}

double waiting_arrival_correlation(double rho_c, double rho, double mu)
{
    check_load(rho_c, rho, mu);
    const double other = rho - rho_c;
    const double free_other = 1.0 - other;
    const double own = rho_c * (1.0 - rho * other) / ((1.0 - rho) * free_other * free_other * free_other);
    const double cross = other / (rho_c * free_other);
    return (own + cross) / (mu * mu);
}

double sojourn_interdeparture_product(const PathLoads& loads)
{
    loads.validate();
    double sum = 0.0;
    for (const auto& n : loads.nodes)
        sum += waiting_arrival_correlation(n.rho_class, n.rho, n.mu) + 1.0 / (n.mu * loads.lambda);
    return sum;
}

double peak_age_path(const PathLoads& loads)
{
    loads.validate();
    double sojourn = 0.0;
    for (const auto& n : loads.nodes)
        sojourn += 1.0 / (n.mu * (1.0 - n.rho)); // 1 / (mu - lambda_total)
    return 1.0 / loads.lambda + sojourn;
}

AgeReport age_path(const PathLoads& loads)
{
    AgeReport report;
    report.e_sd = sojourn_interdeparture_product(loads);
    report.h_left = loads.lambda * report.e_sd;
    report.h = report.h_left + 1.0 / loads.lambda;
    report.h_right = report.h_left + 2.0 / loads.lambda;
    report.peak = peak_age_path(loads);
    report.peak_extended = loads.nodes.size() > 1;
    for (const auto& n : loads.nodes) {
        report.per_node_terms.push_back(
            {n.node, loads.lambda * waiting_arrival_correlation(n.rho_class, n.rho, n.mu), 1.0 / n.mu});
    }
    return report;
}

double tandem_age(int n, double lambda, double mu)
{
    if (n < 1)
        throw DomainError("path length must be at least 1");
    if (!(lambda > 0.0) || !(mu > 0.0))
        throw DomainError("rates must be positive");
    const double rho = lambda / mu;
    if (!(1.0 - rho >= kSaturationGuard))
        throw DomainError("tandem is not stable");
    return n * rho * rho / (mu - lambda) + n / mu + 1.0 / lambda;
}

TwoClassAges two_class_ages(double lambda_a, double lambda_b, double mu1, double mu2, double mu3)
{
    if (!(lambda_a > 0.0) || !(lambda_b > 0.0))
        throw DomainError("class rates must be positive");
    if (!(mu1 > 0.0) || !(mu2 > 0.0) || !(mu3 > 0.0))
        throw DomainError("service rates must be positive");
    if (!(lambda_a < mu1) || !(lambda_b < mu2) || !(lambda_a + lambda_b < mu3))
        throw DomainError("two-class network is not stable");

    const double rho1 = lambda_a / mu1;
    const double rho2 = lambda_b / mu2;
    const double rho3 = (lambda_a + lambda_b) / mu3;
    const double rho_a3 = lambda_a / mu3;
    const double rho_b3 = lambda_b / mu3;
    if (!(1.0 - rho1 >= kSaturationGuard) || !(1.0 - rho2 >= kSaturationGuard) ||
        !(1.0 - rho3 >= kSaturationGuard))
        throw DomainError("two-class network is not stable");

    auto merge_term = [&](double lambda_own, double rho_own, double rho_other) {
        const double f = 1.0 - rho_other;
        return lambda_own / (mu3 * mu3) *
               (rho_own * (1.0 - rho3 * rho_other) / ((1.0 - rho3) * f * f * f) +
                rho_other / (rho_own * f));
    };

    TwoClassAges out;
    out.alpha = rho1 * rho1 / (mu1 - lambda_a) + merge_term(lambda_a, rho_a3, rho_b3) + 1.0 / mu1 +
                1.0 / mu3 + 1.0 / lambda_a;
    out.beta = rho2 * rho2 / (mu2 - lambda_b) + merge_term(lambda_b, rho_b3, rho_a3) + 1.0 / mu2 +
               1.0 / mu3 + 1.0 / lambda_b;
    return out;
}

} // namespace aoinet
