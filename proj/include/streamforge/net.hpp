#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "streamforge/engine.hpp"
#include "streamforge/errors.hpp"
#include "streamforge/metrics.hpp"
#include "streamforge/protocol.hpp"
#include "streamforge/random.hpp"
#include "streamforge/spec.hpp"

namespace streamforge {

/// Serialization plus propagation for one frame over one link, in integer
/// microseconds, rounding the serialization term up. bw in Mbps is bits/us.
inline SimTime transmission_time(std::int64_t size_bytes, const LinkSpec& link) {
    auto bps = static_cast<unsigned __int128>(link.bits_per_sec());
    auto bits = static_cast<unsigned __int128>(size_bytes) * 8u * 1'000'000u;
    SimTime ser = static_cast<SimTime>((bits + bps - 1) / bps);
    return ser + link.lat_us;
}

using RoutingTable = std::map<std::pair<std::string, std::string>, std::vector<std::string>>;

/// All-pairs shortest paths among hosts by hop count; ties resolve to the
/// lexicographically smallest node-id sequence. Routes are precomputed once;
/// link faults drop traffic rather than reroute it.
inline RoutingTable compute_routes(const ExperimentSpec& spec) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : spec.nodes) adj[n.id];
    for (const auto& l : spec.links) {
        adj[l.a].push_back(l.b);
        adj[l.b].push_back(l.a);
    }
    for (auto& [id, neigh] : adj) std::sort(neigh.begin(), neigh.end());

    std::vector<std::string> hosts;
    for (const auto& n : spec.nodes) {
        if (!n.is_switch()) hosts.push_back(n.id);
    }
    std::sort(hosts.begin(), hosts.end());

    // BFS from every destination, then walk greedily from the source picking
    // the smallest next hop that still shortens the distance.
    RoutingTable routes;
    std::vector<std::string> unreachable;
    for (const auto& dst : hosts) {
        std::map<std::string, int> dist;
        dist[dst] = 0;
        std::deque<std::string> q{dst};
        while (!q.empty()) {
            std::string cur = q.front();
            q.pop_front();
            for (const auto& next : adj[cur]) {
                if (!dist.count(next)) {
                    dist[next] = dist[cur] + 1;
                    q.push_back(next);
                }
            }
        }
        for (const auto& src : hosts) {
            if (src == dst) continue;
            if (!dist.count(src)) {
                unreachable.push_back(src + "<->" + dst);
                continue;
            }
            std::vector<std::string> path{src};
            std::string cur = src;
            while (cur != dst) {
                const std::string* best = nullptr;
                for (const auto& next : adj[cur]) {
                    if (dist.count(next) && dist[next] == dist[cur] - 1) {
                        if (!best || next < *best) best = &next;
                    }
                }
                cur = *best;
                path.push_back(cur);
            }
            routes[{src, dst}] = std::move(path);
        }
    }
    if (!unreachable.empty()) {
        std::string msg = "no path between host pairs:";
        for (const auto& p : unreachable) msg += " " + p;
        throw DisconnectedError(msg);
    }
    return routes;
}

struct LinkStats {
    std::int64_t hops_attempted = 0;
    std::int64_t hops_delivered = 0;
    std::int64_t dropped_loss = 0;
    std::int64_t dropped_down = 0;
};

/// Store-and-forward link emulation: per-direction FIFO with bandwidth
/// serialization, propagation delay, Bernoulli per-hop loss, and link-state
/// changes from the fault injector.
class Network {
  public:
    using DeliverFn = std::function<void(Message&&)>;

    Network(Engine& eng, const ExperimentSpec& spec, MetricsStore& metrics)
        : eng_(eng), metrics_(metrics) {
        for (const auto& l : spec.links) {
            LinkRuntime rt;
            rt.spec = l;
            rt.effective_loss_pct = l.loss_pct;
            rt.rng = RandomSource(spec.seed, "link:" + canonical(l.a, l.b));
            links_.emplace(canonical(l.a, l.b), std::move(rt));
            ports_[{l.a, l.port_a}];
            ports_[{l.b, l.port_b}];
            metrics_.register_port(l.a, l.port_a);
            metrics_.register_port(l.b, l.port_b);
        }
        routes_ = compute_routes(spec);
    }

    void set_deliver(DeliverFn fn) { deliver_ = std::move(fn); }

    /// Sends one protocol message from node to node along the precomputed
    /// route. Same-node traffic is delivered at the current time without
    /// touching any link.
    void send_frame(const std::string& src_node, const std::string& dst_node, Message msg) {
        if (src_node == dst_node) {
            auto frame = std::make_shared<Message>(std::move(msg));
            eng_.schedule(eng_.now(), "net:local", [this, frame] { deliver_(std::move(*frame)); });
            return;
        }
        auto it = routes_.find({src_node, dst_node});
        if (it == routes_.end()) {
            throw DisconnectedError("no route " + src_node + " -> " + dst_node);
        }
        auto frame = std::make_shared<InFlight>();
        frame->size_bytes = body_bytes(msg.body) + kFrameOverheadBytes;
        frame->msg = std::move(msg);
        frame->path = it->second;
        start_hop(frame, 0, eng_.now());
    }

    // ---- fault hooks --------------------------------------------------------
    void set_link_up(const std::string& target, bool up) {
        LinkRuntime& l = resolve(target);
        if (l.up && !up) l.last_down_at = eng_.now();
        l.up = up;
        if (up) l.effective_loss_pct = l.spec.loss_pct;
    }
    /// setLoss only raises loss above the configured floor; linkUp resets it.
    void set_loss(const std::string& target, double pct) {
        LinkRuntime& l = resolve(target);
        l.effective_loss_pct = std::max(l.spec.loss_pct, pct);
    }
    bool link_up(const std::string& target) { return resolve(target).up; }
    double effective_loss(const std::string& target) { return resolve(target).effective_loss_pct; }

    const LinkStats& link_stats(const std::string& target) { return resolve(target).stats; }

    // ---- port counters --------------------------------------------------------
    void sample_ports() {
        for (const auto& [key, t] : ports_) {
            metrics_.sample_port(key.first, key.second, eng_.now(), t.tx, t.rx);
        }
    }
    std::pair<std::int64_t, std::int64_t> port_totals(const std::string& node, int port) const {
        auto it = ports_.find({node, port});
        if (it == ports_.end()) throw UnknownPortError(node + ":" + std::to_string(port));
        return {it->second.tx, it->second.rx};
    }

    const RoutingTable& routes() const { return routes_; }

  private:
    struct LinkRuntime {
        LinkSpec spec;
        bool up = true;
        double effective_loss_pct = 0.0;
        SimTime busy_until[2] = {0, 0};
        SimTime last_down_at = -1;
        RandomSource rng;
        LinkStats stats;
    };
    struct InFlight {
        Message msg;
        std::int64_t size_bytes = 0;
        std::vector<std::string> path;
    };
    struct PortTotals {
        std::int64_t tx = 0;
        std::int64_t rx = 0;
    };

    static std::string canonical(const std::string& a, const std::string& b) {
        return a < b ? a + "|" + b : b + "|" + a;
    }

    LinkRuntime& resolve(const std::string& target) {
        auto dash = target.find('-');
        if (dash != std::string::npos) {
            auto it = links_.find(canonical(target.substr(0, dash), target.substr(dash + 1)));
            if (it != links_.end()) return it->second;
        }
        auto it = links_.find(target);
        if (it != links_.end()) return it->second;
        throw ValidationError("unknown link '" + target + "'");
    }

    void start_hop(std::shared_ptr<InFlight> frame, std::size_t idx, SimTime arrival) {
        const std::string& u = frame->path[idx];
        const std::string& v = frame->path[idx + 1];
        LinkRuntime& link = links_.at(canonical(u, v));
        int dir = (u == link.spec.a) ? 0 : 1;
        auto bps = static_cast<unsigned __int128>(link.spec.bits_per_sec());
        auto bits = static_cast<unsigned __int128>(frame->size_bytes) * 8u * 1'000'000u;
        SimTime ser = static_cast<SimTime>((bits + bps - 1) / bps);

        // Reserve the transmit slot now so same-direction frames keep FIFO
        // order regardless of how their start events interleave.
        SimTime start = std::max(arrival, link.busy_until[dir]);
        link.busy_until[dir] = start + ser;
        SimTime arrive = start + ser + link.spec.lat_us;

        eng_.schedule(start, "net", [this, frame, idx, start, arrive]() {
            const std::string& tx_node = frame->path[idx];
            const std::string& rx_node = frame->path[idx + 1];
            LinkRuntime& l = links_.at(canonical(tx_node, rx_node));
            ++l.stats.hops_attempted;
            if (!l.up) {
                ++l.stats.dropped_down;
                return;
            }
            int tx_port = (tx_node == l.spec.a) ? l.spec.port_a : l.spec.port_b;
            ports_[{tx_node, tx_port}].tx += frame->size_bytes;
            if (l.rng.bernoulli(l.effective_loss_pct / 100.0)) {
                ++l.stats.dropped_loss;
                return;
            }
            eng_.schedule(arrive, "net", [this, frame, idx, start]() {
                const std::string& txn = frame->path[idx];
                const std::string& rxn = frame->path[idx + 1];
                LinkRuntime& lk = links_.at(canonical(txn, rxn));
                if (lk.last_down_at >= start) {
                    // went down while the frame was on the wire
                    ++lk.stats.dropped_down;
                    return;
                }
                ++lk.stats.hops_delivered;
                int rx_port = (rxn == lk.spec.a) ? lk.spec.port_a : lk.spec.port_b;
                ports_[{rxn, rx_port}].rx += frame->size_bytes;
                if (idx + 2 == frame->path.size()) {
                    deliver_(std::move(frame->msg));
                } else {
                    start_hop(frame, idx + 1, eng_.now());
                }
            });
        });
    }

    Engine& eng_;
    MetricsStore& metrics_;
    std::map<std::string, LinkRuntime> links_;
    RoutingTable routes_;
    std::map<std::pair<std::string, int>, PortTotals> ports_;
    DeliverFn deliver_;
};

}  // namespace streamforge
