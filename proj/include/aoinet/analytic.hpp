#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "aoinet/netmodel.hpp"

namespace aoinet {

/// Thrown for inputs outside the stable domain of the closed forms.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Loads seen by one class along its itinerary, in visiting order.
struct PathNodeLoad {
    NodeId node = 0;
    double mu = 0.0;
    double rho = 0.0;       // total load at the node
    double rho_class = 0.0; // this class's share of it
};

struct PathLoads {
    double lambda = 0.0;
    std::vector<PathNodeLoad> nodes;

    /// Throws DomainError unless 0 < rho_class <= rho < 1 on every node and
    /// lambda == rho_class * mu (to a relative 1e-9) along the whole path.
    void validate() const;
};

/// Single-class homogeneous path: n nodes of rate mu carrying only lambda.
PathLoads homogeneous_path(int n, double lambda, double mu);

/// Loads for class `cls` read off a traffic solution.
PathLoads path_loads(const NetworkSpec& net, const FlowSolution& flow, const std::string& cls);

struct NodeTerm {
    NodeId node = 0;
    double waiting_term = 0.0; // lambda_c * E[W A]
    double service_term = 0.0; // 1 / mu
};

struct AgeReport {
    double h_left = 0.0;
    double h = 0.0;
    double h_right = 0.0;
    /// 1/lambda + mean end-to-end sojourn. Exact for one node; for longer
    /// paths it is the additive extension and `peak_extended` is set.
    double peak = 0.0;
    bool peak_extended = false;
    std::vector<NodeTerm> per_node_terms;
    double e_sd = 0.0; // E[S D], time units squared
};

/// E[W A] at one FCFS M/M/1 node shared by several Poisson classes: W is the
/// queueing delay of a tagged-class packet, A the tagged-class interarrival
/// time preceding it.
double waiting_arrival_correlation(double rho_c, double rho, double mu);

/// E[S D] along the path: sum over nodes of E[W A] + 1/(mu lambda).
double sojourn_interdeparture_product(const PathLoads& loads);

double peak_age_path(const PathLoads& loads);

AgeReport age_path(const PathLoads& loads);

/// Mean age for n identical M/M/1 queues in tandem with one class.
double tandem_age(int n, double lambda, double mu);

struct TwoClassAges {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Classes alpha (1 -> 3) and beta (2 -> 3) merging at an output queue.
TwoClassAges two_class_ages(double lambda_a, double lambda_b, double mu1, double mu2, double mu3);

} // namespace aoinet
