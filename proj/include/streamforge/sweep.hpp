#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "streamforge/metrics.hpp"
#include "streamforge/simulation.hpp"
#include "streamforge/spec.hpp"

namespace streamforge {

/// Applies one attribute override to a parsed spec. Paths:
///   seed | duration              (graph.seed / graph.duration also accepted)
///   node:<id>.cpuPercentage
///   link:<id>.lat | .bw | .loss
///   topic:<name>.preferredLeader | .replicationFactor | .consistencyMode
///   replicate:<nodeId>           (value = total copies of the node + its links)
inline void apply_override(ExperimentSpec& spec, const std::string& path,
                           const std::string& value) {
    auto as_double = [&](const std::string& what) {
        try {
            std::size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw SweepError(what + " needs a numeric value, got '" + value + "'");
        }
    };

    std::string p = path;
    if (p.rfind("graph.", 0) == 0) p = p.substr(6);
    if (p == "seed") {
        spec.seed = static_cast<std::uint64_t>(as_double("seed"));
        return;
    }
    if (p == "duration") {
        double d = as_double("duration");
        if (d <= 0) throw SweepError("duration must be > 0");
        spec.duration_us = us_from_seconds(d);
        return;
    }
    auto colon = p.find(':');
    auto dot = p.find('.', colon == std::string::npos ? 0 : colon);
    std::string kind = colon == std::string::npos ? "" : p.substr(0, colon);
    std::string id =
        colon == std::string::npos
            ? ""
            : p.substr(colon + 1, (dot == std::string::npos ? p.size() : dot) - colon - 1);
    std::string attr = dot == std::string::npos ? "" : p.substr(dot + 1);

    if (kind == "link") {
        for (auto& l : spec.links) {
            if (l.id() != id && l.b + "-" + l.a != id) continue;
            if (attr == "lat") {
                double ms = as_double("lat");
                if (ms < 0) throw SweepError("lat must be >= 0");
                l.lat_us = us_from_ms(ms);
            } else if (attr == "bw") {
                double bw = as_double("bw");
                if (bw <= 0) throw SweepError("bw must be > 0");
                l.bw_mbps = bw;
            } else if (attr == "loss") {
                double loss = as_double("loss");
                if (loss < 0 || loss > 100) throw SweepError("loss must be within [0,100]");
                l.loss_pct = loss;
            } else {
                throw SweepError("unknown link attribute '" + attr + "'");
            }
            return;
        }
        throw SweepError("no link '" + id + "'");
    }
    if (kind == "node") {
        for (auto& n : spec.nodes) {
            if (n.id != id) continue;
            if (attr == "cpuPercentage") {
                double c = as_double("cpuPercentage");
                if (c <= 0 || c > 1) throw SweepError("cpuPercentage must be in (0,1]");
                n.cpu_percentage = c;
            } else {
                throw SweepError("unknown node attribute '" + attr + "'");
            }
            return;
        }
        throw SweepError("no node '" + id + "'");
    }
    if (kind == "topic") {
        for (auto& t : spec.topics) {
            if (t.name != id) continue;
            if (attr == "preferredLeader") {
                t.preferred_leader = value;
            } else if (attr == "replicationFactor") {
                t.replication_factor = static_cast<int>(as_double("replicationFactor"));
            } else if (attr == "consistencyMode") {
                if (value == "zk") t.mode = ConsistencyMode::Zk;
                else if (value == "raft") t.mode = ConsistencyMode::Raft;
                else throw SweepError("consistencyMode must be zk or raft");
            } else {
                throw SweepError("unknown topic attribute '" + attr + "'");
            }
            return;
        }
        throw SweepError("no topic '" + id + "'");
    }
    if (kind == "replicate") {
        int total = static_cast<int>(as_double("replicate"));
        if (total < 1) throw SweepError("replicate needs a count >= 1");
        const NodeSpec* base = spec.find_node(id);
        if (!base) throw SweepError("no node '" + id + "'");
        NodeSpec prototype = *base;
        std::vector<LinkSpec> base_links;
        for (const auto& l : spec.links) {
            if (l.a == id || l.b == id) base_links.push_back(l);
        }
        std::map<std::string, int> max_port;
        for (const auto& l : spec.links) {
            max_port[l.a] = std::max(max_port[l.a], l.port_a);
            max_port[l.b] = std::max(max_port[l.b], l.port_b);
        }
        for (int k = 2; k <= total; ++k) {
            NodeSpec clone = prototype;
            clone.id = id + "_" + std::to_string(k);
            spec.nodes.push_back(clone);
            for (LinkSpec l : base_links) {
                if (l.a == id) {
                    l.a = clone.id;
                    l.port_b = ++max_port[l.b];
                } else {
                    l.b = clone.id;
                    l.port_a = ++max_port[l.a];
                }
                spec.links.push_back(l);
            }
        }
        return;
    }
    throw SweepError("cannot resolve sweep attribute path '" + path + "'");
}

struct SweepResult {
    std::string value;
    std::filesystem::path out_dir;
    Summary summary;
};

/// Runs the spec once per value with an identical seed, exporting each run to
/// out_root/<attr>=<value>/ and a combined summary CSV at out_root.
inline std::vector<SweepResult> run_sweep(const ExperimentSpec& base, const std::string& attr,
                                          const std::vector<std::string>& values,
                                          const std::filesystem::path& out_root) {
    if (values.empty()) throw SweepError("sweep needs at least one value");
    std::vector<SweepResult> results;
    for (const std::string& v : values) {
        ExperimentSpec spec = base;
        apply_override(spec, attr, v);
        detail::validate_spec(spec);
        Simulation sim(std::move(spec));
        sim.run();
        SweepResult r;
        r.value = v;
        r.out_dir = out_root / (detail::sanitize_filename(attr) + "=" + detail::sanitize_filename(v));
        sim.export_all(r.out_dir);
        r.summary = sim.summarize();
        results.push_back(std::move(r));
    }

    std::filesystem::create_directories(out_root);
    std::ofstream out(out_root / "sweep_summary.csv");
    if (!out) throw IoError("cannot write sweep_summary.csv");
    out << "sweep_value,scope,name,metric,value\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& r : results) {
        for (const auto& [topic, t] : r.summary.topics) {
            out << r.value << ",topic," << topic << ",latency_mean_us," << t.latency_mean_us
                << '\n';
            out << r.value << ",topic," << topic << ",latency_p99_us," << t.latency_p99_us << '\n';
            out << r.value << ",topic," << topic << ",delivered_unique," << t.delivered_unique
                << '\n';
            out << r.value << ",topic," << topic << ",lost," << t.lost << '\n';
        }
        for (const auto& [sink, sk] : r.summary.sinks) {
            out << r.value << ",sink," << sink << ",e2e_mean_us," << sk.e2e_mean_us << '\n';
            out << r.value << ",sink," << sink << ",samples," << sk.samples << '\n';
        }
        for (const auto& p : r.summary.ports) {
            out << r.value << ",port," << p.node << ":" << p.port << ",mean_rx_bps,"
                << p.mean_rx_bps << '\n';
        }
    }
    return results;
}

}  // namespace streamforge
