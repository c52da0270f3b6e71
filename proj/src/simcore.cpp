#include "aoinet/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <queue>
#include <random>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

namespace aoinet {

namespace {

constexpr std::size_t kMinDepartures = 100;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t class_stream_key(const std::string& name) { return fnv1a("class:" + name); }
std::uint64_t node_stream_key(NodeId id) { return fnv1a("node:" + std::to_string(id)); }

class ExpStream {
public:
    explicit ExpStream(std::uint64_t seed) : m_engine(seed) {}

    // Inverse transform on a 53-bit uniform in [0, 1).
    double next(double rate)
    {
        const double u = static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
        return -std::log1p(-u) / rate;
    }

private:
    std::mt19937_64 m_engine;
};

struct NodeState {
    double mu = 0.0;
    ExpStream service;
    std::deque<Packet> queue; // front is in service
    std::vector<double> last_class_arrival;
    bool sample_wa = false;
};

struct ClassState {
    double lambda = 0.0;
    ExpStream arrivals;
    std::vector<std::size_t> route; // node indices
    std::uint64_t next_serial = 0;
    std::uint64_t next_exit = 0;
};

class Replication {
public:
    Replication(const NetworkSpec& net, const SimConfig& cfg, std::uint32_t replication, const TraceSink& trace)
        : m_net(net), m_horizon(cfg.horizon), m_warmup(cfg.warmup_fraction * cfg.horizon), m_trace(trace)
    {
        std::unordered_map<NodeId, std::size_t> index;
        for (const auto& n : net.nodes) {
            index[n.id] = m_nodes.size();
            m_nodes.push_back({n.mu, ExpStream(stream_seed(cfg.master_seed, replication, node_stream_key(n.id))),
                               {}, std::vector<double>(net.classes.size(), -1.0),
                               cfg.wa_node && *cfg.wa_node == n.id});
        }
        for (const auto& c : net.classes) {
            ClassState state{c.lambda, ExpStream(stream_seed(cfg.master_seed, replication, class_stream_key(c.name))),
                             {}, 0, 0};
            for (NodeId id : c.itinerary)
                state.route.push_back(index.at(id));
            m_classes.push_back(std::move(state));
        }
        m_out.resize(net.classes.size());
    }

    std::vector<ClassReplication> run()
    {
        for (std::size_t c = 0; c < m_classes.size(); ++c)
            schedule_arrival(c, 0.0);

        while (!m_calendar.empty() && m_calendar.top().time <= m_horizon) {
            Event ev = m_calendar.top();
            m_calendar.pop();
            if (ev.kind == EventKind::Arrival)
                on_arrival(ev);
            else
                on_completion(ev);
        }

        for (const auto& node : m_nodes)
            for (const auto& p : node.queue)
                ++m_out[p.class_index].in_system;
        for (std::size_t c = 0; c < m_out.size(); ++c) {
            const auto& r = m_out[c];
            if (r.entered != r.exited + r.in_system)
                throw SimError("packet count mismatch for class '" + m_net.classes[c].name + "'");
        }
        return std::move(m_out);
    }

private:
    void push(double time, EventKind kind, NodeId node, std::size_t cls, std::uint64_t packet)
    {
        m_calendar.push({time, m_seq++, kind, node, cls, packet});
    }

    void schedule_arrival(std::size_t c, double now)
    {
        auto& cls = m_classes[c];
        push(now + cls.arrivals.next(cls.lambda), EventKind::Arrival, 0, c, cls.next_serial++);
    }

    void on_arrival(const Event& ev)
    {
        Packet p;
        p.class_index = ev.class_index;
        p.serial = ev.packet;
        p.gen_time = ev.time;
        ++m_out[ev.class_index].entered;
        schedule_arrival(ev.class_index, ev.time);
        enter_node(m_classes[ev.class_index].route.front(), std::move(p), ev.time);
    }

    void enter_node(std::size_t n, Packet p, double now)
    {
        auto& node = m_nodes[n];
        p.node_arrival = now;
        double& last = node.last_class_arrival[p.class_index];
        p.class_gap = last < 0.0 ? -1.0 : now - last;
        last = now;
        node.queue.push_back(std::move(p));
        if (node.queue.size() == 1)
            start_service(n, now);
    }

    void start_service(std::size_t n, double now)
    {
        auto& node = m_nodes[n];
        const Packet& p = node.queue.front();
        if (node.sample_wa && p.class_gap >= 0.0 && p.node_arrival >= m_warmup) {
            auto& out = m_out[p.class_index];
            out.wa_sum += (now - p.node_arrival) * p.class_gap;
            ++out.wa_count;
        }
        push(now + node.service.next(node.mu), EventKind::ServiceCompletion, m_net.nodes[n].id, p.class_index,
             p.serial);
    }

    void on_completion(const Event& ev)
    {
        std::size_t n = 0;
        while (m_net.nodes[n].id != ev.node)
            ++n;
        auto& node = m_nodes[n];
        Packet p = std::move(node.queue.front());
        node.queue.pop_front();
        if (!node.queue.empty())
            start_service(n, ev.time);

        auto& cls = m_classes[p.class_index];
        if (++p.hop_index < cls.route.size()) {
            enter_node(cls.route[p.hop_index], std::move(p), ev.time);
            return;
        }

        if (p.serial != cls.next_exit)
            throw SimError("class '" + m_net.classes[p.class_index].name + "' packet " +
                           std::to_string(p.serial) + " exited before packet " + std::to_string(cls.next_exit));
        ++cls.next_exit;
        auto& out = m_out[p.class_index];
        ++out.exited;
        if (m_trace)
            m_trace(m_net.classes[p.class_index].name, p.gen_time, ev.time);
        if (ev.time >= m_warmup)
            out.departures.push_back({ev.time - p.gen_time, ev.time});
    }

    const NetworkSpec& m_net;
    double m_horizon;
    double m_warmup;
    const TraceSink& m_trace;
    std::vector<NodeState> m_nodes;
    std::vector<ClassState> m_classes;
    std::vector<ClassReplication> m_out;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> m_calendar;
    std::uint64_t m_seq = 0;
};

void require_departures(std::span<const Departure> d, std::size_t n)
{
    if (d.size() < n)
        throw SimError("too few departures: need " + std::to_string(n) + ", have " + std::to_string(d.size()));
}

Estimate reduce(const std::vector<double>& xs)
{
    Estimate e;
    const double r = static_cast<double>(xs.size());
    for (double x : xs)
        e.mean += x;
    e.mean /= r;
    if (xs.size() < 2) {
        e.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double x : xs)
        ss += (x - e.mean) * (x - e.mean);
    const double sd = std::sqrt(ss / (r - 1.0));
    boost::math::students_t dist(r - 1.0);
    e.ci_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(r);
    return e;
}

} // namespace

void SimConfig::validate() const
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw SimError("horizon must be positive");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw SimError("warm-up fraction must be in [0, 1)");
    if (replications < 1)
        throw SimError("need at least one replication");
}

const ClassStats& SimStats::at(const std::string& name) const
{
    for (const auto& c : classes)
        if (c.name == name)
            return c;
    throw SimError("no statistics for class '" + name + "'");
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint32_t replication, std::uint64_t stream_key)
{
    return splitmix64(splitmix64(master_seed ^ splitmix64(replication)) ^ stream_key);
}

SawtoothEstimate estimate_age_sawtooth(std::span<const Departure> departures)
{
    require_departures(departures, 2);
    double left = 0.0;
    double square = 0.0;
    for (std::size_t i = 0; i + 1 < departures.size(); ++i) {
        const double gap = departures[i + 1].exit_time - departures[i].exit_time;
        if (!(gap > 0.0))
            throw SimError("exit times must be strictly increasing");
        left += departures[i].sojourn * gap;
        square += gap * gap;
    }
    const double span = departures.back().exit_time - departures.front().exit_time;
    SawtoothEstimate est;
    est.h_left = left / span;
    est.h = (left + square / 2.0) / span;
    est.h_right = (left + square) / span;
    return est;
}

Moments interdeparture_stats(std::span<const Departure> departures)
{
    require_departures(departures, 2);
    Moments m;
    const double n = static_cast<double>(departures.size() - 1);
    for (std::size_t i = 0; i + 1 < departures.size(); ++i) {
        const double gap = departures[i + 1].exit_time - departures[i].exit_time;
        m.mean += gap;
        m.second_moment += gap * gap;
    }
    m.mean /= n;
    m.second_moment /= n;
    return m;
}

double sojourn_stats(std::span<const Departure> departures)
{
    require_departures(departures, 1);
    double sum = 0.0;
    for (const auto& d : departures)
        sum += d.sojourn;
    return sum / static_cast<double>(departures.size());
}

double peak_age_stats(std::span<const Departure> departures)
{
    require_departures(departures, 2);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < departures.size(); ++i)
        sum += departures[i].sojourn + (departures[i + 1].exit_time - departures[i].exit_time);
    return sum / static_cast<double>(departures.size() - 1);
}

std::vector<ClassReplication> run_replication(const NetworkSpec& net, const SimConfig& cfg,
                                              std::uint32_t replication, const TraceSink& trace)
{
    return Replication(net, cfg, replication, trace).run();
}

SimStats simulate(const NetworkSpec& net, const SimConfig& cfg, const TraceSink& trace)
{
    net.validate();
    cfg.validate();
    const auto flow = solve_traffic(net);
    if (auto bad = check_stability(flow, net); !bad.empty())
        throw SimError("network is unstable at node " + std::to_string(bad.front().node));
    if (auto bad = check_overtake_free(net); !bad.empty())
        throw SimError("network is not overtake-free: classes '" + bad.front().class_a + "' and '" +
                       bad.front().class_b + "'");

    std::vector<std::future<std::vector<ClassReplication>>> jobs;
    for (int r = 0; r < cfg.replications; ++r) {
        const TraceSink* sink = r == 0 ? &trace : nullptr;
        jobs.push_back(std::async(std::launch::async, [&net, &cfg, r, sink] {
            static const TraceSink none;
            return run_replication(net, cfg, static_cast<std::uint32_t>(r), sink ? *sink : none);
        }));
    }
    std::vector<std::vector<ClassReplication>> runs;
    for (auto& job : jobs)
        runs.push_back(job.get());

    SimStats stats;
    for (std::size_t c = 0; c < net.classes.size(); ++c) {
        ClassStats cs;
        cs.name = net.classes[c].name;
        std::vector<double> h, hl, hr, pk, dm, d2, sj, wa;
        for (const auto& run : runs) {
            const auto& rep = run[c];
            if (rep.departures.size() < kMinDepartures)
                throw SimError("too few departures for class '" + cs.name + "': " +
                               std::to_string(rep.departures.size()) + " after warm-up, need " +
                               std::to_string(kMinDepartures) + "; increase the horizon");
            const auto saw = estimate_age_sawtooth(rep.departures);
            const auto mom = interdeparture_stats(rep.departures);
            h.push_back(saw.h);
            hl.push_back(saw.h_left);
            hr.push_back(saw.h_right);
            pk.push_back(peak_age_stats(rep.departures));
            dm.push_back(mom.mean);
            d2.push_back(mom.second_moment);
            sj.push_back(sojourn_stats(rep.departures));
            if (rep.wa_count > 0)
                wa.push_back(rep.wa_sum / static_cast<double>(rep.wa_count));
            cs.departures_count += rep.departures.size();
        }
        cs.h = reduce(h);
        cs.h_left = reduce(hl);
        cs.h_right = reduce(hr);
        cs.peak = reduce(pk);
        cs.d_mean = reduce(dm);
        cs.d_second_moment = reduce(d2);
        cs.sojourn_mean = reduce(sj);
        if (wa.size() == runs.size())
            cs.w_a_product_mean = reduce(wa);
        stats.classes.push_back(std::move(cs));
    }
    return stats;
}

} // namespace aoinet
