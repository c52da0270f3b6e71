#include "aoinet/netmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace aoinet {

SpecError::SpecError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ": " + what),
      m_line(line), m_column(column)
{
}

const NodeSpec* NetworkSpec::find_node(NodeId id) const
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const NodeSpec& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const ClassSpec* NetworkSpec::find_class(std::string_view name) const
{
    auto it = std::find_if(classes.begin(), classes.end(),
                           [name](const ClassSpec& c) { return c.name == name; });
    return it == classes.end() ? nullptr : &*it;
}

void NetworkSpec::validate() const
{
    if (nodes.empty())
        throw SpecError("network has no nodes");
    if (classes.empty())
        throw SpecError("network has no classes");

    std::set<NodeId> ids;
    for (const auto& n : nodes) {
        if (n.id == 0)
            throw SpecError("node ids must be positive");
        if (!(n.mu > 0.0) || !std::isfinite(n.mu))
            throw SpecError("node " + std::to_string(n.id) + ": mu must be positive");
        if (!ids.insert(n.id).second)
            throw SpecError("duplicate node id " + std::to_string(n.id));
    }

    std::set<std::string> names;
    for (const auto& c : classes) {
        if (c.name.empty())
            throw SpecError("class with empty name");
        if (!names.insert(c.name).second)
            throw SpecError("duplicate class name '" + c.name + "'");
        if (!(c.lambda > 0.0) || !std::isfinite(c.lambda))
            throw SpecError("class '" + c.name + "': lambda must be positive");
        if (c.itinerary.empty())
            throw SpecError("class '" + c.name + "': empty path");
        std::set<NodeId> seen;
        for (NodeId id : c.itinerary) {
            if (!ids.count(id))
                throw SpecError("class '" + c.name + "': unknown node " + std::to_string(id));
            if (!seen.insert(id).second)
                throw SpecError("class '" + c.name + "': node " + std::to_string(id) +
                                " visited twice");
        }
    }
}

double FlowSolution::class_rate(const std::string& cls, NodeId node) const
{
    auto it = per_class_node_rate.find({cls, node});
    return it == per_class_node_rate.end() ? 0.0 : it->second;
}

double FlowSolution::class_load(const std::string& cls, NodeId node) const
{
    auto it = class_node_load.find({cls, node});
    return it == class_node_load.end() ? 0.0 : it->second;
}

namespace {

struct Token {
    std::string_view text;
    std::size_t column;
};

std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        if (i >= line.size())
            break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line, std::size_t column)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw SpecError("malformed number '" + std::string(s) + "'", line, column);
    return value;
}

NodeId parse_id(std::string_view s, std::size_t line, std::size_t column)
{
    NodeId value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || value == 0)
        throw SpecError("malformed node id '" + std::string(s) + "'", line, column);
    return value;
}

// Splits "key=value"; returns the value view or throws if the key differs.
std::string_view expect_key(const Token& tok, std::string_view key, std::size_t line)
{
    auto eq = tok.text.find('=');
    if (eq == std::string_view::npos || tok.text.substr(0, eq) != key)
        throw SpecError("expected '" + std::string(key) + "=<value>', got '" +
                            std::string(tok.text) + "'",
                        line, tok.column);
    return tok.text.substr(eq + 1);
}

} // namespace

NetworkSpec parse_network(std::string_view text)
{
    NetworkSpec net;
    std::vector<std::pair<std::size_t, std::size_t>> path_pos;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        auto toks = tokenize(line);
        if (toks.empty())
            continue;

        if (toks[0].text == "node") {
            if (toks.size() != 3)
                throw SpecError("expected 'node <id> mu=<float>'", line_no, toks[0].column);
            NodeSpec node;
            node.id = parse_id(toks[1].text, line_no, toks[1].column);
            auto mu = expect_key(toks[2], "mu", line_no);
            node.mu = parse_double(mu, line_no, toks[2].column + 3);
            if (net.find_node(node.id))
                throw SpecError("duplicate node id " + std::to_string(node.id), line_no, toks[1].column);
            if (!(node.mu > 0.0) || !std::isfinite(node.mu))
                throw SpecError("mu must be positive", line_no, toks[2].column);
            net.nodes.push_back(node);
        } else if (toks[0].text == "class") {
            if (toks.size() != 4)
                throw SpecError("expected 'class <name> lambda=<float> path=<id>[,<id>...]'", line_no,
                                toks[0].column);
            ClassSpec cls;
            cls.name = std::string(toks[1].text);
            if (net.find_class(cls.name))
                throw SpecError("duplicate class name '" + cls.name + "'", line_no, toks[1].column);
            auto lambda = expect_key(toks[2], "lambda", line_no);
            cls.lambda = parse_double(lambda, line_no, toks[2].column + 7);
            if (!(cls.lambda > 0.0) || !std::isfinite(cls.lambda))
                throw SpecError("lambda must be positive", line_no, toks[2].column);
            auto path = expect_key(toks[3], "path", line_no);
            std::size_t col = toks[3].column + 5;
            std::size_t p = 0;
            while (true) {
                auto comma = path.find(',', p);
                auto item = path.substr(p, comma == std::string_view::npos ? path.size() - p : comma - p);
                cls.itinerary.push_back(parse_id(item, line_no, col + p));
                if (comma == std::string_view::npos)
                    break;
                p = comma + 1;
            }
            net.classes.push_back(std::move(cls));
            path_pos.emplace_back(line_no, toks[3].column);
        } else {
            throw SpecError("unknown directive '" + std::string(toks[0].text) + "'", line_no,
                            toks[0].column);
        }
    }

    // Itineraries may reference nodes declared later in the file, so node
    // references are resolved once the whole document has been read.
    for (std::size_t i = 0; i < net.classes.size(); ++i) {
        const auto& cls = net.classes[i];
        std::set<NodeId> seen;
        for (NodeId id : cls.itinerary) {
            if (!net.find_node(id))
                throw SpecError("class '" + cls.name + "': unknown node " + std::to_string(id),
                                path_pos[i].first, path_pos[i].second);
            if (!seen.insert(id).second)
                throw SpecError("class '" + cls.name + "': node " + std::to_string(id) +
                                    " visited twice",
                                path_pos[i].first, path_pos[i].second);
        }
    }
    net.validate();
    return net;
}

NetworkSpec load_network(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

FlowSolution solve_traffic(const NetworkSpec& net)
{
    FlowSolution flow;
    for (const auto& n : net.nodes) {
        flow.node_total_rate[n.id] = 0.0;
        flow.node_load[n.id] = 0.0;
    }
    // 0/1 routing: a class contributes its full exogenous rate to every node
    // on its itinerary and nothing elsewhere.
    for (const auto& c : net.classes) {
        for (NodeId id : c.itinerary) {
            const double mu = net.find_node(id)->mu;
            flow.per_class_node_rate[{c.name, id}] = c.lambda;
            flow.class_node_load[{c.name, id}] = c.lambda / mu;
        }
    }
    // Sum in class-name order so declaration order cannot change the rounding.
    for (const auto& [key, rate] : flow.per_class_node_rate)
        flow.node_total_rate[key.second] += rate;
    for (const auto& [key, load] : flow.class_node_load)
        flow.node_load[key.second] += load;
    return flow;
}

std::vector<StabilityViolation> check_stability(const FlowSolution& flow, const NetworkSpec& net)
{
    std::vector<StabilityViolation> out;
    std::vector<NodeSpec> nodes = net.nodes;
    std::sort(nodes.begin(), nodes.end(), [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    for (const auto& n : nodes) {
        auto it = flow.node_total_rate.find(n.id);
        const double lambda = it == flow.node_total_rate.end() ? 0.0 : it->second;
        if (!(lambda < n.mu))
            out.push_back({n.id, lambda, n.mu});
    }
    return out;
}

namespace {

std::vector<std::size_t> positions_of(const std::vector<NodeId>& path, const std::vector<NodeId>& nodes)
{
    std::vector<std::size_t> pos;
    for (NodeId id : nodes)
        pos.push_back(static_cast<std::size_t>(std::find(path.begin(), path.end(), id) - path.begin()));
    return pos;
}

bool contiguous_increasing(const std::vector<std::size_t>& pos)
{
    for (std::size_t i = 1; i < pos.size(); ++i)
        if (pos[i] != pos[i - 1] + 1)
            return false;
    return true;
}

} // namespace

std::vector<OvertakeViolation> check_overtake_free(const NetworkSpec& net)
{
    std::vector<OvertakeViolation> out;

    for (const auto& c : net.classes) {
        std::vector<NodeId> dups;
        std::set<NodeId> seen;
        for (NodeId id : c.itinerary)
            if (!seen.insert(id).second)
                dups.push_back(id);
        if (!dups.empty())
            out.push_back({c.name, c.name, dups, "itinerary revisits a node (cycle)"});
    }

    for (std::size_t i = 0; i < net.classes.size(); ++i) {
        for (std::size_t j = i + 1; j < net.classes.size(); ++j) {
            const auto& a = net.classes[i];
            const auto& b = net.classes[j];

            std::vector<NodeId> common;
            for (NodeId id : a.itinerary)
                if (std::find(b.itinerary.begin(), b.itinerary.end(), id) != b.itinerary.end())
                    common.push_back(id);
            if (common.size() < 2)
                continue;

            // common is in a's visiting order; positions in a are increasing.
            auto pos_a = positions_of(a.itinerary, common);
            auto pos_b = positions_of(b.itinerary, common);
            if (!std::is_sorted(pos_b.begin(), pos_b.end())) {
                out.push_back({a.name, b.name, common, "shared nodes visited in different order"});
            } else if (!contiguous_increasing(pos_a) || !contiguous_increasing(pos_b)) {
                out.push_back({a.name, b.name, common,
                               "shared nodes not contiguous (forward short-circuit)"});
            }
        }
    }
    return out;
}

} // namespace aoinet
