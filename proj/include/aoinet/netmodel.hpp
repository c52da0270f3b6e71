#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aoinet {

using NodeId = std::uint32_t;

struct NodeSpec {
    NodeId id = 0;
    double mu = 0.0;
};

struct ClassSpec {
    std::string name;
    double lambda = 0.0;
    std::vector<NodeId> itinerary;
};

/// Raised by parse_network and NetworkSpec::validate. Line/column are 1-based,
/// 0 when the error is not tied to a position in a document.
class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const { return m_line; }
    std::size_t column() const { return m_column; }

private:
    std::size_t m_line;
    std::size_t m_column;
};

/// Open multi-class network of FCFS exponential servers. The source/sink node
/// is implicit: each class enters at the first node of its itinerary and
/// leaves after the last one.
struct NetworkSpec {
    std::vector<NodeSpec> nodes;
    std::vector<ClassSpec> classes;

    const NodeSpec* find_node(NodeId id) const;
    const ClassSpec* find_class(std::string_view name) const;

    /// Throws SpecError on the first broken invariant.
    void validate() const;
};

using ClassNodeKey = std::pair<std::string, NodeId>;

/// Equilibrium rates from the traffic equations. Keys only exist for pairs
/// that carry traffic; absent keys mean a zero rate.
struct FlowSolution {
    std::map<ClassNodeKey, double> per_class_node_rate;
    std::map<NodeId, double> node_total_rate;
    std::map<NodeId, double> node_load;
    std::map<ClassNodeKey, double> class_node_load;

    double class_rate(const std::string& cls, NodeId node) const;
    double class_load(const std::string& cls, NodeId node) const;
};

struct StabilityViolation {
    NodeId node = 0;
    double lambda = 0.0;
    double mu = 0.0;
};

struct OvertakeViolation {
    std::string class_a;
    std::string class_b;
    std::vector<NodeId> nodes;
    std::string reason;
};

NetworkSpec parse_network(std::string_view text);
NetworkSpec load_network(const std::string& path);

FlowSolution solve_traffic(const NetworkSpec& net);

std::vector<StabilityViolation> check_stability(const FlowSolution& flow, const NetworkSpec& net);

/// Conservative, sufficient-only test: every itinerary is duplicate-free and,
/// for each pair of classes, the shared nodes form one contiguous segment of
/// both itineraries and are visited in the same order.
std::vector<OvertakeViolation> check_overtake_free(const NetworkSpec& net);

} // namespace aoinet
