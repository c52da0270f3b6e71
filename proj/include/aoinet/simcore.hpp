#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoinet/netmodel.hpp"

namespace aoinet {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double horizon = 1e6;
    double warmup_fraction = 0.1;
    int replications = 10;
    std::uint64_t master_seed = 1;
    /// When set, the W*A product is sampled at this node for every class
    /// that visits it.
    std::optional<NodeId> wa_node;

    void validate() const;
};

enum class EventKind : std::uint8_t { Arrival, ServiceCompletion };

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Arrival;
    NodeId node = 0;
    std::size_t class_index = 0; // arrivals only
    std::uint64_t packet = 0;    // per-class serial number

    friend bool operator>(const Event& a, const Event& b)
    {
        return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
};

struct Packet {
    std::size_t class_index = 0;
    std::uint64_t serial = 0;
    double gen_time = 0.0;
    std::size_t hop_index = 0;
    double node_arrival = 0.0;
    double class_gap = -1.0; // same-class interarrival at the current node, < 0 if unknown
};

struct Departure {
    double sojourn = 0.0;
    double exit_time = 0.0;
};

struct SawtoothEstimate {
    double h_left = 0.0;
    double h = 0.0;
    double h_right = 0.0;
};

struct Moments {
    double mean = 0.0;
    double second_moment = 0.0;
};

/// Time averages of the age sawtooth over [first exit, last exit].
SawtoothEstimate estimate_age_sawtooth(std::span<const Departure> departures);
Moments interdeparture_stats(std::span<const Departure> departures);
double sojourn_stats(std::span<const Departure> departures);
/// Mean of the age just before each exit after the first.
double peak_age_stats(std::span<const Departure> departures);

struct Estimate {
    double mean = 0.0;
    double ci_half_width = 0.0; // 95% Student-t across replications; NaN with one replication
};

struct ClassStats {
    std::string name;
    Estimate h;
    Estimate h_left;
    Estimate h_right;
    Estimate peak;
    Estimate d_mean;
    Estimate d_second_moment;
    Estimate sojourn_mean;
    std::optional<Estimate> w_a_product_mean;
    std::uint64_t departures_count = 0; // post-warm-up, summed over replications
};

struct SimStats {
    std::vector<ClassStats> classes; // in declaration order

    const ClassStats& at(const std::string& name) const;
};

struct ClassReplication {
    std::vector<Departure> departures; // post-warm-up, in exit order
    std::uint64_t entered = 0;
    std::uint64_t exited = 0;
    std::uint64_t in_system = 0;
    double wa_sum = 0.0;
    std::uint64_t wa_count = 0;
};

/// Receives (class, gen_time, exit_time) for every exit of a replication.
using TraceSink = std::function<void(const std::string&, double, double)>;

/// One independent run. Throws SimError if a class overtakes itself or the
/// packet count does not balance.
std::vector<ClassReplication> run_replication(const NetworkSpec& net, const SimConfig& cfg,
                                              std::uint32_t replication, const TraceSink& trace = {});

/// Runs all replications and reduces them. `trace`, when given, receives
/// replication 0 only.
SimStats simulate(const NetworkSpec& net, const SimConfig& cfg, const TraceSink& trace = {});

/// Seed for one random stream of one replication.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint32_t replication, std::uint64_t stream_key);

} // namespace aoinet
