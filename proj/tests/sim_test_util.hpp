#pragma once

// Shared programmatic spec builders for the simulation-level tests.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamforge/simulation.hpp"

namespace sft {

using namespace streamforge;

struct SiteOpts {
    bool broker = true;
    std::optional<ProducerSettings> producer;
    std::optional<ConsumerSettings> consumer;
    std::optional<JobSettings> job;
    std::optional<StoreSettings> store;
    double cpu = 1.0;
};

/// Builds a star topology: every listed node hangs off hub switch "sw1".
struct SpecBuilder {
    ExperimentSpec spec;
    int next_port = 1;

    SpecBuilder() {
        spec.seed = 1;
        spec.duration_us = 60 * kUsPerSec;
        NodeSpec hub;
        hub.id = "sw1";
        hub.kind = NodeKind::Switch;
        spec.nodes.push_back(hub);
    }

    SpecBuilder& seed(std::uint64_t s) {
        spec.seed = s;
        return *this;
    }
    SpecBuilder& duration_s(double s) {
        spec.duration_us = us_from_seconds(s);
        return *this;
    }

    SpecBuilder& site(const std::string& id, SiteOpts opts, double link_lat_ms = 2.0,
                      double link_bw_mbps = 100.0, double link_loss = 0.0) {
        NodeSpec n;
        n.id = id;
        n.kind = NodeKind::Host;
        n.cpu_percentage = opts.cpu;
        if (opts.broker) n.broker = BrokerSettings{};
        n.producer = opts.producer;
        n.consumer = opts.consumer;
        n.job = opts.job;
        n.store = opts.store;
        spec.nodes.push_back(n);

        LinkSpec l;
        l.a = id;
        l.b = "sw1";
        l.lat_us = us_from_ms(link_lat_ms);
        l.bw_mbps = link_bw_mbps;
        l.loss_pct = link_loss;
        l.port_a = 1;
        l.port_b = next_port++;
        spec.links.push_back(l);
        return *this;
    }

    SpecBuilder& broker_settings(const std::string& node, BrokerSettings s) {
        for (auto& n : spec.nodes) {
            if (n.id == node) n.broker = s;
        }
        return *this;
    }

    SpecBuilder& topic(const std::string& name, const std::string& leader, int rf,
                       ConsistencyMode mode = ConsistencyMode::Zk) {
        TopicSpec t;
        t.name = name;
        t.preferred_leader = leader;
        t.replication_factor = rf;
        t.mode = mode;
        spec.topics.push_back(t);
        return *this;
    }

    SpecBuilder& fault(FaultKind kind, const std::string& target, double at_s,
                       std::optional<double> param = std::nullopt) {
        FaultSpec f;
        f.label = "f" + std::to_string(spec.faults.size());
        f.kind = kind;
        f.target = target;
        f.at_us = us_from_seconds(at_s);
        f.param = param;
        spec.faults.push_back(f);
        return *this;
    }

    ExperimentSpec build() {
        std::stable_sort(spec.faults.begin(), spec.faults.end(),
                         [](const FaultSpec& a, const FaultSpec& b) { return a.at_us < b.at_us; });
        return spec;
    }
};

inline ProducerSettings synthetic_producer(double rate_kbps, std::int64_t record_size,
                                           std::map<std::string, double> weights,
                                           std::int64_t buffer = kDefaultBufferBytes) {
    ProducerSettings p;
    p.mode = ProducerMode::SyntheticRate;
    p.rate_kbps = rate_kbps;
    p.record_size_bytes = record_size;
    p.buffer_bytes = buffer;
    p.topic_weights = std::move(weights);
    return p;
}

inline ConsumerSettings consumer_of(std::vector<std::string> topics) {
    ConsumerSettings c;
    c.topics = std::move(topics);
    return c;
}

}  // namespace sft
