#include "aoinet/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "aoinet/analytic.hpp"

namespace aoinet {

namespace {

std::string format_with(double value, const char* fmt)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, value);
    return buf;
}

std::string format_ids(const std::vector<NodeId>& ids)
{
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i)
        s += (i ? "," : "") + std::to_string(ids[i]);
    return s;
}

// Loads a spec, reporting problems on `err`. Returns an exit code on failure.
std::optional<int> load(const std::string& path, NetworkSpec& net, std::ostream& err)
{
    try {
        net = load_network(path);
        return std::nullopt;
    } catch (const SpecError& e) {
        err << "error: " << path << ": " << e.what() << "\n";
        return exit_code::validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
}

// Prints every stability and overtake violation; returns true if there were none.
bool report_checks(const NetworkSpec& net, const FlowSolution& flow, std::ostream& err)
{
    bool ok = true;
    for (const auto& v : check_stability(flow, net)) {
        err << "unstable: node " << v.node << " lambda=" << format_number(v.lambda)
            << " mu=" << format_number(v.mu) << "\n";
        ok = false;
    }
    for (const auto& v : check_overtake_free(net)) {
        err << "not overtake-free: classes " << v.class_a << "," << v.class_b << " nodes "
            << format_ids(v.nodes) << ": " << v.reason << "\n";
        ok = false;
    }
    return ok;
}

std::optional<int> check_config(const SimConfig& cfg, std::ostream& err)
{
    try {
        cfg.validate();
        return std::nullopt;
    } catch (const SimError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
}

double parse_grid_number(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw UsageError("malformed grid number '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string format_number(double value) { return format_with(value, "%.6g"); }

SweepGrid SweepGrid::parse(std::string_view text)
{
    auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw UsageError("grid must look like param=start:stop:step");
    SweepGrid g;
    g.param = std::string(text.substr(0, eq));
    auto rest = text.substr(eq + 1);
    auto c1 = rest.find(':');
    auto c2 = c1 == std::string_view::npos ? c1 : rest.find(':', c1 + 1);
    if (c2 == std::string_view::npos || rest.find(':', c2 + 1) != std::string_view::npos)
        throw UsageError("grid must look like param=start:stop:step");
    g.start = parse_grid_number(rest.substr(0, c1));
    g.stop = parse_grid_number(rest.substr(c1 + 1, c2 - c1 - 1));
    g.step = parse_grid_number(rest.substr(c2 + 1));
    if (!(g.start > 0.0) || !(g.stop > 0.0) || !(g.step > 0.0))
        throw UsageError("grid start, stop and step must be positive");
    if (g.start > g.stop)
        throw UsageError("grid start exceeds stop");
    return g;
}

std::vector<double> SweepGrid::points() const
{
    std::vector<double> out;
    const double slack = 1e-9 * step;
    for (std::size_t k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + slack)
            break;
        out.push_back(v);
    }
    return out;
}

NetworkSpec SweepGrid::apply(const NetworkSpec& net, double value) const
{
    NetworkSpec copy = net;
    auto dot = param.find('.');
    const std::string kind = param.substr(0, dot);
    const std::string target = dot == std::string::npos ? "" : param.substr(dot + 1);

    if (kind == "lambda") {
        if (target.empty() && copy.classes.size() != 1)
            throw UsageError("network has several classes; use lambda.<class>");
        for (auto& c : copy.classes) {
            if (target.empty() || c.name == target) {
                c.lambda = value;
                return copy;
            }
        }
        throw UsageError("no class named '" + target + "'");
    }
    if (kind == "mu") {
        if (target.empty() && copy.nodes.size() != 1)
            throw UsageError("network has several nodes; use mu.<node>");
        for (auto& n : copy.nodes) {
            if (target.empty() || std::to_string(n.id) == target) {
                n.mu = value;
                return copy;
            }
        }
        throw UsageError("no node with id '" + target + "'");
    }
    throw UsageError("unknown grid parameter '" + param + "' (expected lambda.<class> or mu.<node>)");
}

std::vector<double> reproduction_grid()
{
    std::vector<double> g;
    for (int k = 1; k <= 99; ++k)
        g.push_back(k / 100.0);
    return g;
}

TandemSummary tandem_summary()
{
    TandemSummary s;
    for (int n : {1, 2, 5, 10}) {
        TandemMinimum best{n, 0.0, std::numeric_limits<double>::infinity()};
        for (double lambda : reproduction_grid()) {
            const double h = tandem_age(n, lambda, 1.0);
            if (h < best.h)
                best = {n, lambda, h};
        }
        s.minima.push_back(best);
    }
    s.saturation_gap = tandem_age(10, 0.99, 1.0) - tandem_age(1, 0.99, 1.0);
    return s;
}

TwoClassSummary two_class_summary()
{
    TwoClassSummary s;
    const double inf = std::numeric_limits<double>::infinity();
    s.boundary_min_h_alpha = s.interior_min_h_alpha = s.min_sum = inf;
    const auto grid = reproduction_grid();
    for (double la : grid) {
        const double boundary = two_class_ages(la, kBoundaryRate, 1.0, 1.0, 1.0).alpha;
        if (boundary < s.boundary_min_h_alpha) {
            s.boundary_min_h_alpha = boundary;
            s.boundary_lambda_a = la;
        }
        for (double lb : grid) {
            TwoClassAges ages;
            try {
                ages = two_class_ages(la, lb, 1.0, 1.0, 1.0);
            } catch (const DomainError&) {
                continue;
            }
            if (ages.alpha < s.interior_min_h_alpha) {
                s.interior_min_h_alpha = ages.alpha;
                s.interior_lambda_a = la;
                s.interior_lambda_b = lb;
            }
            if (ages.alpha + ages.beta < s.min_sum) {
                s.min_sum = ages.alpha + ages.beta;
                s.sum_lambda_a = la;
                s.sum_lambda_b = lb;
                s.sum_h_alpha = ages.alpha;
                s.sum_h_beta = ages.beta;
            }
        }
    }
    return s;
}

int cmd_validate(const std::string& spec_path, std::ostream& out, std::ostream& err)
{
    NetworkSpec net;
    if (auto rc = load(spec_path, net, err))
        return *rc;

    const auto flow = solve_traffic(net);
    out << "node,lambda,mu,rho\n";
    for (const auto& [id, lambda] : flow.node_total_rate)
        out << id << "," << format_number(lambda) << "," << format_number(net.find_node(id)->mu) << ","
            << format_number(flow.node_load.at(id)) << "\n";

    const auto unstable = check_stability(flow, net);
    const auto overtakes = check_overtake_free(net);
    for (const auto& v : unstable)
        out << "unstable: node " << v.node << " lambda=" << format_number(v.lambda)
            << " mu=" << format_number(v.mu) << "\n";
    for (const auto& v : overtakes)
        out << "overtake violation: classes " << v.class_a << "," << v.class_b << " nodes "
            << format_ids(v.nodes) << ": " << v.reason << "\n";
    out << "stability: " << (unstable.empty() ? "stable" : "unstable") << "\n";
    out << "overtake-free: " << (overtakes.empty() ? "yes" : "no") << " (conservative check)\n";
    if (!unstable.empty() || !overtakes.empty()) {
        out << "verdict: invalid\n";
        return exit_code::validation;
    }
    out << "verdict: stable, overtake-free\n";
    return exit_code::ok;
}

int cmd_analyze(const std::string& spec_path, std::ostream& out, std::ostream& err)
{
    NetworkSpec net;
    if (auto rc = load(spec_path, net, err))
        return *rc;
    const auto flow = solve_traffic(net);
    if (!report_checks(net, flow, err))
        return exit_code::validation;

    std::size_t width = 0;
    for (const auto& c : net.classes)
        width = std::max(width, c.itinerary.size());

    out << "class,lambda,h_left,h,h_right,peak,peak_extended";
    for (std::size_t j = 1; j <= width; ++j)
        out << ",node_" << j << ",waiting_" << j << ",service_" << j;
    out << "\n";

    for (const auto& c : net.classes) {
        AgeReport r;
        try {
            r = age_path(path_loads(net, flow, c.name));
        } catch (const DomainError& e) {
            err << "error: class " << c.name << ": " << e.what() << "\n";
            return exit_code::validation;
        }
        out << c.name << "," << format_number(c.lambda) << "," << format_number(r.h_left) << ","
            << format_number(r.h) << "," << format_number(r.h_right) << "," << format_number(r.peak) << ","
            << (r.peak_extended ? "extended" : "exact");
        for (std::size_t j = 0; j < width; ++j) {
            if (j < r.per_node_terms.size()) {
                const auto& t = r.per_node_terms[j];
                out << "," << t.node << "," << format_number(t.waiting_term) << ","
                    << format_number(t.service_term);
            } else {
                out << ",,,";
            }
        }
        out << "\n";
    }
    return exit_code::ok;
}

int cmd_simulate(const std::string& spec_path, const SimConfig& cfg, std::ostream& out, std::ostream& err,
                 std::ostream* trace)
{
    if (auto rc = check_config(cfg, err))
        return *rc;
    NetworkSpec net;
    if (auto rc = load(spec_path, net, err))
        return *rc;
    const auto flow = solve_traffic(net);
    if (!report_checks(net, flow, err))
        return exit_code::validation;

    TraceSink sink;
    if (trace)
        sink = [trace](const std::string& cls, double gen, double exit) {
            *trace << cls << "," << format_with(gen, "%.10g") << "," << format_with(exit, "%.10g") << "\n";
        };

    SimStats stats;
    try {
        stats = simulate(net, cfg, sink);
    } catch (const SimError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::validation;
    }

    out << "class,h_analytic,h_hat,h_hat_ci,h_left_hat,h_left_ci,h_right_hat,h_right_ci,peak_hat,d_mean,d_m2,"
           "sojourn_mean,departures";
    if (cfg.wa_node)
        out << ",wa_analytic,wa_hat,wa_ci";
    out << "\n";
    for (const auto& cs : stats.classes) {
        const auto loads = path_loads(net, flow, cs.name);
        out << cs.name << "," << format_number(age_path(loads).h) << "," << format_number(cs.h.mean) << ","
            << format_number(cs.h.ci_half_width) << "," << format_number(cs.h_left.mean) << ","
            << format_number(cs.h_left.ci_half_width) << "," << format_number(cs.h_right.mean) << ","
            << format_number(cs.h_right.ci_half_width) << "," << format_number(cs.peak.mean) << ","
            << format_number(cs.d_mean.mean) << "," << format_number(cs.d_second_moment.mean) << ","
            << format_number(cs.sojourn_mean.mean) << "," << cs.departures_count;
        if (cfg.wa_node) {
            auto it = std::find_if(loads.nodes.begin(), loads.nodes.end(),
                                   [&](const PathNodeLoad& n) { return n.node == *cfg.wa_node; });
            if (it != loads.nodes.end() && cs.w_a_product_mean) {
                out << "," << format_number(waiting_arrival_correlation(it->rho_class, it->rho, it->mu)) << ","
                    << format_number(cs.w_a_product_mean->mean) << ","
                    << format_number(cs.w_a_product_mean->ci_half_width);
            } else {
                out << ",,,";
            }
        }
        out << "\n";
    }
    return exit_code::ok;
}

int cmd_sweep(const std::string& spec_path, const SweepGrid& grid, bool simulate_points, const SimConfig& cfg,
              std::ostream& out, std::ostream& err)
{
    if (simulate_points)
        if (auto rc = check_config(cfg, err))
            return *rc;
    NetworkSpec base;
    if (auto rc = load(spec_path, base, err))
        return *rc;
    if (auto bad = check_overtake_free(base); !bad.empty()) {
        report_checks(base, solve_traffic(base), err);
        return exit_code::validation;
    }

    std::vector<double> points;
    try {
        points = grid.points();
        grid.apply(base, grid.start);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }

    out << grid.param << ",status";
    for (const auto& c : base.classes)
        out << ",h_" << c.name;
    if (simulate_points)
        for (const auto& c : base.classes)
            out << ",h_hat_" << c.name << ",h_hat_ci_" << c.name;
    out << "\n";

    const std::size_t cells = base.classes.size() * (simulate_points ? 3 : 1);
    auto emit_unstable = [&] {
        out << ",unstable" << std::string(cells, ',') << "\n";
    };

    // Rows are produced in grid order; each point is independent.
    for (double value : points) {
        const NetworkSpec net = grid.apply(base, value);
        const auto flow = solve_traffic(net);
        out << format_number(value);
        if (!check_stability(flow, net).empty()) {
            emit_unstable();
            continue;
        }

        std::vector<double> ages;
        try {
            for (const auto& c : net.classes)
                ages.push_back(age_path(path_loads(net, flow, c.name)).h);
        } catch (const DomainError&) {
            // Stable by the strict check but inside the saturation guard.
            emit_unstable();
            continue;
        }
        out << ",ok";
        for (double h : ages)
            out << "," << format_number(h);
        if (simulate_points) {
            SimStats stats;
            try {
                stats = simulate(net, cfg);
            } catch (const SimError& e) {
                out << "\n";
                err << "error: at " << grid.param << "=" << format_number(value) << ": " << e.what() << "\n";
                return exit_code::validation;
            }
            for (const auto& cs : stats.classes)
                out << "," << format_number(cs.h.mean) << "," << format_number(cs.h.ci_half_width);
        }
        out << "\n";
    }
    return exit_code::ok;
}

namespace {

void write_fig3(const std::filesystem::path& dir)
{
    std::ofstream csv(dir / "fig3.csv");
    csv << "lambda,n,H\n";
    for (int n : {1, 2, 5, 10})
        for (double lambda : reproduction_grid())
            csv << format_number(lambda) << "," << n << "," << format_number(tandem_age(n, lambda, 1.0)) << "\n";

    const auto s = tandem_summary();
    std::ofstream summary(dir / "summary_fig3.txt");
    for (const auto& m : s.minima) {
        summary << "argmin_rho_n" << m.n << "=" << format_number(m.lambda) << "\n";
        summary << "min_h_n" << m.n << "=" << format_number(m.h) << "\n";
    }
    summary << "gap_rho_0.99_n10_minus_n1=" << format_number(s.saturation_gap) << "\n";
    if (!csv || !summary)
        throw std::runtime_error("write failed in " + dir.string());
}

void write_fig5(const std::filesystem::path& dir, bool scatter)
{
    std::ofstream csv(dir / (scatter ? "fig5b.csv" : "fig5a.csv"));
    csv << (scatter ? "lambda_a,lambda_b,H_alpha,H_beta\n" : "lambda_a,lambda_b,H_alpha\n");
    for (double la : reproduction_grid()) {
        for (double lb : reproduction_grid()) {
            csv << format_number(la) << "," << format_number(lb);
            try {
                const auto ages = two_class_ages(la, lb, 1.0, 1.0, 1.0);
                csv << "," << format_number(ages.alpha);
                if (scatter)
                    csv << "," << format_number(ages.beta);
            } catch (const DomainError&) {
                csv << (scatter ? ",unstable,unstable" : ",unstable");
            }
            csv << "\n";
        }
    }

    const auto s = two_class_summary();
    std::ofstream summary(dir / "summary_fig5.txt");
    summary << "min_h_alpha=" << format_number(s.boundary_min_h_alpha) << "\n"
            << "min_h_alpha_rho1=" << format_number(s.boundary_lambda_a) << "\n"
            << "min_h_alpha_rho2=boundary\n"
            << "interior_min_h_alpha=" << format_number(s.interior_min_h_alpha) << "\n"
            << "interior_min_h_alpha_rho1=" << format_number(s.interior_lambda_a) << "\n"
            << "interior_min_h_alpha_rho2=" << format_number(s.interior_lambda_b) << "\n"
            << "min_h_sum=" << format_number(s.min_sum) << "\n"
            << "min_h_sum_rho1=" << format_number(s.sum_lambda_a) << "\n"
            << "min_h_sum_rho2=" << format_number(s.sum_lambda_b) << "\n"
            << "h_alpha_at_min_sum=" << format_number(s.sum_h_alpha) << "\n"
            << "h_beta_at_min_sum=" << format_number(s.sum_h_beta) << "\n";
    if (!csv || !summary)
        throw std::runtime_error("write failed in " + dir.string());
}

} // namespace

int cmd_reproduce(const std::string& figure, const std::string& out_dir, std::ostream& out, std::ostream& err)
{
    if (figure != "fig3" && figure != "fig5a" && figure != "fig5b" && figure != "all") {
        err << "error: unknown figure '" << figure << "' (expected fig3, fig5a, fig5b or all)\n";
        return exit_code::usage;
    }
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        err << "error: cannot create output directory '" << out_dir << "'\n";
        return exit_code::usage;
    }

    try {
        if (figure == "fig3" || figure == "all")
            write_fig3(dir);
        if (figure == "fig5a" || figure == "all")
            write_fig5(dir, false);
        if (figure == "fig5b" || figure == "all")
            write_fig5(dir, true);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
    out << "wrote " << figure << " to " << dir.string() << "\n";
    return exit_code::ok;
}

} // namespace aoinet
