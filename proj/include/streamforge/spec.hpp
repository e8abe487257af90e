#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "streamforge/config.hpp"
#include "streamforge/errors.hpp"
#include "streamforge/sim_time.hpp"

namespace streamforge {

enum class NodeKind { Host, Switch };
enum class ConsistencyMode { Zk, Raft };
enum class FaultKind { LinkDown, LinkUp, NodeCrash, NodeRecover, SetLoss };
enum class ProducerMode { SyntheticRate, LineOfFile, FileOfDirectory };
enum class OperatorKind { SplitWords, CountByKey, WindowedAverage, JoinGroupWindow, PassthroughCost };

// Broker/producer protocol timing defaults; every one of them can be
// overridden per scenario through brokerCfg / prodCfg.
constexpr SimTime kDefaultHeartbeatUs = 1 * kUsPerSec;
constexpr SimTime kDefaultSessionTimeoutUs = 6 * kUsPerSec;
constexpr SimTime kDefaultElectionDelayUs = 1 * kUsPerSec;
constexpr SimTime kDefaultPreferredCheckUs = 5 * kUsPerSec;
constexpr SimTime kDefaultReplicaLagMaxUs = 6 * kUsPerSec;
constexpr SimTime kDefaultRetryIntervalUs = 2 * kUsPerSec;
constexpr SimTime kDefaultProduceTimeoutUs = 30 * kUsPerSec;
constexpr SimTime kDefaultFetchMaxWaitUs = 500 * kUsPerMs;
constexpr std::int64_t kDefaultFetchMinBytes = 1;
constexpr std::int64_t kDefaultBufferBytes = 16 * 1024 * 1024;
constexpr std::uint64_t kDefaultSeed = 1;
constexpr double kDefaultDurationSec = 600.0;

struct ProducerSettings {
    ProducerMode mode = ProducerMode::SyntheticRate;
    std::string path;  // lineOfFile / fileOfDirectory source, resolved
    double rate_kbps = 0.0;
    std::int64_t record_size_bytes = 0;
    std::int64_t buffer_bytes = kDefaultBufferBytes;
    std::map<std::string, double> topic_weights;
    SimTime retry_interval_us = kDefaultRetryIntervalUs;
    SimTime produce_timeout_us = kDefaultProduceTimeoutUs;

    bool operator==(const ProducerSettings&) const = default;
};

struct ConsumerSettings {
    std::vector<std::string> topics;
    bool operator==(const ConsumerSettings&) const = default;
};

struct JobSettings {
    OperatorKind kind = OperatorKind::PassthroughCost;
    std::string in_topic;
    std::string out_topic;  // topic name, "sink", or "store:<nodeId>"
    SimTime service_time_us = 0;
    SimTime window_us = 0;
    bool operator==(const JobSettings&) const = default;
};

struct StoreSettings {
    SimTime write_latency_us = 500;
    SimTime read_latency_us = 200;
    bool operator==(const StoreSettings&) const = default;
};

struct BrokerSettings {
    SimTime heartbeat_us = kDefaultHeartbeatUs;
    SimTime session_timeout_us = kDefaultSessionTimeoutUs;
    SimTime election_delay_us = kDefaultElectionDelayUs;
    SimTime preferred_check_us = kDefaultPreferredCheckUs;
    SimTime replica_lag_max_us = kDefaultReplicaLagMaxUs;
    SimTime fetch_max_wait_us = kDefaultFetchMaxWaitUs;
    std::int64_t fetch_min_bytes = kDefaultFetchMinBytes;
    bool operator==(const BrokerSettings&) const = default;
};

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::Host;
    double cpu_percentage = 1.0;

    std::optional<std::string> prod_type, prod_cfg_ref;
    std::optional<std::string> cons_type, cons_cfg_ref;
    std::optional<std::string> stream_proc_type, stream_proc_cfg_ref;
    std::optional<std::string> store_type, store_cfg_ref;
    std::optional<std::string> broker_cfg_ref;

    std::optional<ProducerSettings> producer;
    std::optional<ConsumerSettings> consumer;
    std::optional<JobSettings> job;
    std::optional<StoreSettings> store;
    std::optional<BrokerSettings> broker;

    bool is_switch() const { return kind == NodeKind::Switch; }
    bool hosts_broker() const { return broker.has_value(); }

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    std::string a, b;       // endpoints as declared (edge source/target)
    SimTime lat_us = 0;     // propagation delay
    double bw_mbps = 1.0;   // 1 Mbps == 1 bit/us
    double loss_pct = 0.0;  // Bernoulli drop probability, percent, per hop
    int port_a = 0;         // st: port on `a`; assigned when not declared
    int port_b = 0;         // dt: port on `b`

    std::string id() const { return a + "-" + b; }
    std::int64_t bits_per_sec() const {
        return static_cast<std::int64_t>(bw_mbps * 1e6 + 0.5);
    }

    bool operator==(const LinkSpec&) const = default;
};

struct TopicSpec {
    std::string name;
    std::string preferred_leader;
    int replication_factor = 1;
    ConsistencyMode mode = ConsistencyMode::Zk;

    bool operator==(const TopicSpec&) const = default;
};

struct FaultSpec {
    std::string label;
    FaultKind kind = FaultKind::LinkDown;
    std::string target;  // link id ("a-b", either orientation) or node id
    SimTime at_us = 0;
    std::optional<double> param;  // loss percent for setLoss

    bool operator==(const FaultSpec&) const = default;
};

struct ExperimentSpec {
    std::string graph_id = "experiment";
    std::uint64_t seed = kDefaultSeed;
    SimTime duration_us = us_from_seconds(kDefaultDurationSec);
    std::string topic_cfg_ref, fault_cfg_ref;
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<TopicSpec> topics;
    std::vector<FaultSpec> faults;  // sorted by (at_us, label)

    const NodeSpec* find_node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    const LinkSpec* find_link(const std::string& target) const {
        for (const auto& l : links) {
            if (l.id() == target || l.b + "-" + l.a == target) return &l;
        }
        return nullptr;
    }
    const TopicSpec* find_topic(const std::string& name) const {
        for (const auto& t : topics)
            if (t.name == name) return &t;
        return nullptr;
    }
    std::vector<std::string> broker_nodes() const {
        std::vector<std::string> out;
        for (const auto& n : nodes)
            if (n.hosts_broker()) out.push_back(n.id);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool operator==(const ExperimentSpec&) const = default;
};

namespace detail {

// Switches follow the Mininet naming convention: s1, sw3, ...
inline bool switch_id(const std::string& id) {
    std::size_t p = 0;
    if (id.size() >= 2 && id[0] == 's') {
        p = (id[1] == 'w') ? 2 : 1;
    } else {
        return false;
    }
    if (p >= id.size()) return false;
    return std::all_of(id.begin() + p, id.end(), [](unsigned char c) { return std::isdigit(c); });
}

inline const std::set<std::string>& graph_attr_keys() {
    static const std::set<std::string> k = {"topicCfg", "faultCfg", "seed", "duration"};
    return k;
}
inline const std::set<std::string>& node_attr_keys() {
    static const std::set<std::string> k = {"prodType",   "prodCfg",       "consType",
                                            "consCfg",    "streamProcType", "streamProcCfg",
                                            "storeType",  "storeCfg",       "brokerCfg",
                                            "cpuPercentage"};
    return k;
}
inline const std::set<std::string>& link_attr_keys() {
    static const std::set<std::string> k = {"lat", "bw", "loss", "st", "dt"};
    return k;
}

inline double to_double(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + raw + "' is not a number");
    }
}

inline std::int64_t to_i64(const std::string& raw, const std::string& where) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + raw + "' is not an integer");
    }
}

inline ConfigMap resolve_config(const std::filesystem::path& dir, const std::string& ref,
                                const std::string& owner) {
    std::filesystem::path p = dir / ref;
    if (!std::filesystem::exists(p)) {
        throw MissingConfigError(owner + " references '" + ref + "' but " + p.string() +
                                 " does not exist");
    }
    return load_component_config(p);
}

inline ProducerMode parse_producer_mode(const std::string& raw, const std::string& where) {
    if (raw == "synthetic" || raw == "syntheticRate") return ProducerMode::SyntheticRate;
    if (raw == "lineOfFile") return ProducerMode::LineOfFile;
    if (raw == "fileOfDirectory") return ProducerMode::FileOfDirectory;
    throw ValidationError(where + ": unknown producer mode '" + raw + "'");
}

inline OperatorKind parse_operator_kind(const std::string& raw, const std::string& where) {
    if (raw == "splitWords") return OperatorKind::SplitWords;
    if (raw == "countByKey") return OperatorKind::CountByKey;
    if (raw == "windowedAverage") return OperatorKind::WindowedAverage;
    if (raw == "joinGroupWindow") return OperatorKind::JoinGroupWindow;
    if (raw == "passthroughCost") return OperatorKind::PassthroughCost;
    throw ValidationError(where + ": unknown operator kind '" + raw + "'");
}

inline SimTime default_service_time_us(OperatorKind k) {
    switch (k) {
        case OperatorKind::SplitWords: return 50;
        case OperatorKind::CountByKey: return 20;
        case OperatorKind::WindowedAverage: return 20;
        case OperatorKind::JoinGroupWindow: return 20;
        case OperatorKind::PassthroughCost: return 0;
    }
    return 0;
}

inline ProducerSettings parse_producer_settings(const ConfigMap& cfg, const std::string& type_attr,
                                                const std::filesystem::path& config_dir,
                                                const std::string& owner) {
    cfg.require_only({"mode", "path", "rateKbps", "recordSizeBytes", "bufferBytes", "topics",
                      "retryIntervalMs", "produceTimeoutMs"});
    ProducerSettings out;
    std::string mode = cfg.get_or("mode", type_attr);
    out.mode = parse_producer_mode(mode, cfg.source);
    if (cfg.has("mode") && parse_producer_mode(type_attr, owner) != out.mode) {
        throw ValidationError(owner + ": prodType '" + type_attr + "' disagrees with mode '" +
                              mode + "' in " + cfg.source);
    }
    out.topic_weights = parse_weight_map(cfg.get("topics"), cfg.source);
    if (out.topic_weights.empty()) {
        throw ValidationError(cfg.source + ": producer needs at least one topic");
    }
    if (out.mode == ProducerMode::SyntheticRate) {
        out.rate_kbps = cfg.get_double("rateKbps");
        out.record_size_bytes = cfg.get_i64("recordSizeBytes");
        if (out.rate_kbps <= 0.0) throw ValidationError(cfg.source + ": rateKbps must be > 0");
        if (out.record_size_bytes <= 0)
            throw ValidationError(cfg.source + ": recordSizeBytes must be > 0");
    } else {
        std::filesystem::path p = config_dir / cfg.get("path");
        out.path = p.string();
        out.rate_kbps = cfg.get_double_or("rateKbps", 64.0);
        if (out.rate_kbps <= 0.0) throw ValidationError(cfg.source + ": rateKbps must be > 0");
        if (!std::filesystem::exists(p)) {
            throw ValidationError(cfg.source + ": data path " + p.string() + " does not exist");
        }
        if (out.mode == ProducerMode::FileOfDirectory && !std::filesystem::is_directory(p)) {
            throw ValidationError(cfg.source + ": path must be a directory for fileOfDirectory");
        }
    }
    out.buffer_bytes = cfg.get_i64_or("bufferBytes", kDefaultBufferBytes);
    if (out.buffer_bytes <= 0) throw ValidationError(cfg.source + ": bufferBytes must be > 0");
    out.retry_interval_us = cfg.get_i64_or("retryIntervalMs", kDefaultRetryIntervalUs / kUsPerMs) * kUsPerMs;
    out.produce_timeout_us =
        cfg.get_i64_or("produceTimeoutMs", kDefaultProduceTimeoutUs / kUsPerMs) * kUsPerMs;
    return out;
}

inline ConsumerSettings parse_consumer_settings(const ConfigMap& cfg) {
    cfg.require_only({"topics"});
    ConsumerSettings out;
    out.topics = split_list(cfg.get("topics"));
    if (out.topics.empty()) throw ValidationError(cfg.source + ": consumer needs topics");
    return out;
}

inline JobSettings parse_job_settings(const ConfigMap& cfg) {
    cfg.require_only({"kind", "inTopic", "outTopic", "serviceTimeUs", "windowSeconds"});
    JobSettings out;
    out.kind = parse_operator_kind(cfg.get("kind"), cfg.source);
    out.in_topic = cfg.get("inTopic");
    out.out_topic = cfg.get("outTopic");
    out.service_time_us = cfg.get_i64_or("serviceTimeUs", default_service_time_us(out.kind));
    if (out.service_time_us < 0) throw ValidationError(cfg.source + ": serviceTimeUs must be >= 0");
    double window_s = cfg.get_double_or("windowSeconds", 0.0);
    out.window_us = us_from_seconds(window_s);
    bool windowed = out.kind == OperatorKind::WindowedAverage ||
                    out.kind == OperatorKind::JoinGroupWindow;
    if (windowed && out.window_us <= 0) {
        throw ValidationError(cfg.source + ": windowed operators need windowSeconds > 0");
    }
    return out;
}

inline StoreSettings parse_store_settings(const ConfigMap& cfg) {
    cfg.require_only({"writeLatencyUs", "readLatencyUs"});
    StoreSettings out;
    out.write_latency_us = cfg.get_i64_or("writeLatencyUs", out.write_latency_us);
    out.read_latency_us = cfg.get_i64_or("readLatencyUs", out.read_latency_us);
    return out;
}

inline BrokerSettings parse_broker_settings(const ConfigMap& cfg) {
    cfg.require_only({"heartbeatIntervalMs", "sessionTimeoutMs", "electionDelayMs",
                      "preferredReplicaCheckMs", "replicaLagMaxMs", "fetchMinBytes",
                      "fetchMaxWaitMs"});
    BrokerSettings out;
    out.heartbeat_us = cfg.get_i64_or("heartbeatIntervalMs", out.heartbeat_us / kUsPerMs) * kUsPerMs;
    out.session_timeout_us =
        cfg.get_i64_or("sessionTimeoutMs", out.session_timeout_us / kUsPerMs) * kUsPerMs;
    out.election_delay_us =
        cfg.get_i64_or("electionDelayMs", out.election_delay_us / kUsPerMs) * kUsPerMs;
    out.preferred_check_us =
        cfg.get_i64_or("preferredReplicaCheckMs", out.preferred_check_us / kUsPerMs) * kUsPerMs;
    out.replica_lag_max_us =
        cfg.get_i64_or("replicaLagMaxMs", out.replica_lag_max_us / kUsPerMs) * kUsPerMs;
    out.fetch_max_wait_us =
        cfg.get_i64_or("fetchMaxWaitMs", out.fetch_max_wait_us / kUsPerMs) * kUsPerMs;
    out.fetch_min_bytes = cfg.get_i64_or("fetchMinBytes", out.fetch_min_bytes);
    if (out.heartbeat_us <= 0 || out.session_timeout_us <= 0 || out.fetch_min_bytes <= 0) {
        throw ValidationError(cfg.source + ": broker timing values must be positive");
    }
    return out;
}

inline std::vector<TopicSpec> parse_topic_rows(const ConfigMap& cfg) {
    std::vector<TopicSpec> out;
    for (const auto& [name, row] : cfg.values) {
        std::vector<std::string> f = split_list(row);
        if (f.size() < 2 || f.size() > 3) {
            throw ParseError(cfg.source + ": topic '" + name +
                             "' needs 'preferredLeader,replicationFactor[,consistencyMode]'");
        }
        TopicSpec t;
        t.name = name;
        t.preferred_leader = f[0];
        t.replication_factor = static_cast<int>(to_i64(f[1], cfg.source + " topic " + name));
        if (f.size() == 3) {
            if (f[2] == "zk") t.mode = ConsistencyMode::Zk;
            else if (f[2] == "raft") t.mode = ConsistencyMode::Raft;
            else throw ParseError(cfg.source + ": topic '" + name + "': consistencyMode must be zk or raft");
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<FaultSpec> parse_fault_rows(const ConfigMap& cfg) {
    std::vector<FaultSpec> out;
    for (const auto& [label, row] : cfg.values) {
        std::vector<std::string> f = split_list(row);
        if (f.size() < 3 || f.size() > 4) {
            throw ParseError(cfg.source + ": fault '" + label +
                             "' needs 'kind,target,atTime[,param]'");
        }
        FaultSpec fs;
        fs.label = label;
        const std::string& kind = f[0];
        if (kind == "linkDown") fs.kind = FaultKind::LinkDown;
        else if (kind == "linkUp") fs.kind = FaultKind::LinkUp;
        else if (kind == "nodeCrash") fs.kind = FaultKind::NodeCrash;
        else if (kind == "nodeRecover") fs.kind = FaultKind::NodeRecover;
        else if (kind == "setLoss") fs.kind = FaultKind::SetLoss;
        else throw ParseError(cfg.source + ": fault '" + label + "': unknown kind '" + kind + "'");
        fs.target = f[1];
        fs.at_us = us_from_seconds(to_double(f[2], cfg.source + " fault " + label));
        if (f.size() == 4) fs.param = to_double(f[3], cfg.source + " fault " + label);
        if (fs.kind == FaultKind::SetLoss && !fs.param) {
            throw ParseError(cfg.source + ": fault '" + label + "': setLoss needs a loss percent");
        }
        out.push_back(std::move(fs));
    }
    std::stable_sort(out.begin(), out.end(), [](const FaultSpec& x, const FaultSpec& y) {
        if (x.at_us != y.at_us) return x.at_us < y.at_us;
        return x.label < y.label;
    });
    return out;
}

inline void validate_spec(ExperimentSpec& spec) {
    std::set<std::string> node_ids;
    for (const auto& n : spec.nodes) {
        if (!node_ids.insert(n.id).second) {
            throw ValidationError("duplicate node id '" + n.id + "'");
        }
        if (n.cpu_percentage <= 0.0 || n.cpu_percentage > 1.0) {
            throw ValidationError("node '" + n.id + "': cpuPercentage " +
                                  std::to_string(n.cpu_percentage) + " outside (0,1]");
        }
        if (n.is_switch()) {
            bool has_components = n.prod_type || n.prod_cfg_ref || n.cons_type || n.cons_cfg_ref ||
                                  n.stream_proc_type || n.stream_proc_cfg_ref || n.store_type ||
                                  n.store_cfg_ref || n.broker_cfg_ref;
            if (has_components || n.cpu_percentage != 1.0) {
                throw ValidationError("switch '" + n.id + "' carries component attributes");
            }
        }
    }

    std::set<std::string> link_pairs;
    std::set<std::pair<std::string, int>> node_ports;
    for (const auto& l : spec.links) {
        if (!node_ids.count(l.a) || !node_ids.count(l.b)) {
            throw ValidationError("link '" + l.id() + "' references a missing node");
        }
        if (l.a == l.b) throw ValidationError("link '" + l.id() + "' is a self loop");
        std::string key = std::min(l.a, l.b) + "|" + std::max(l.a, l.b);
        if (!link_pairs.insert(key).second) {
            throw ValidationError("duplicate link between '" + l.a + "' and '" + l.b + "'");
        }
        if (l.lat_us < 0) {
            throw ValidationError("link '" + l.id() + "': lat must be >= 0 ms");
        }
        if (l.bw_mbps <= 0.0) {
            throw ValidationError("link '" + l.id() + "': bw must be > 0 Mbps");
        }
        if (l.loss_pct < 0.0 || l.loss_pct > 100.0) {
            throw ValidationError("link '" + l.id() + "': loss " + std::to_string(l.loss_pct) +
                                  " outside [0,100]");
        }
        if (!node_ports.insert({l.a, l.port_a}).second) {
            throw ValidationError("node '" + l.a + "': port " + std::to_string(l.port_a) +
                                  " used by more than one link");
        }
        if (!node_ports.insert({l.b, l.port_b}).second) {
            throw ValidationError("node '" + l.b + "': port " + std::to_string(l.port_b) +
                                  " used by more than one link");
        }
    }

    std::vector<std::string> brokers = spec.broker_nodes();
    std::set<std::string> topic_names;
    for (const auto& t : spec.topics) {
        if (!topic_names.insert(t.name).second) {
            throw ValidationError("duplicate topic '" + t.name + "'");
        }
        if (brokers.empty()) {
            throw ValidationError("topic '" + t.name + "' declared but no node hosts a broker");
        }
        const NodeSpec* leader = spec.find_node(t.preferred_leader);
        if (!leader || !leader->hosts_broker()) {
            throw ValidationError("topic '" + t.name + "': preferredLeader '" +
                                  t.preferred_leader + "' is not a broker-hosting node");
        }
        if (t.replication_factor < 1 ||
            t.replication_factor > static_cast<int>(brokers.size())) {
            throw ValidationError("topic '" + t.name + "': replicationFactor " +
                                  std::to_string(t.replication_factor) + " outside [1, " +
                                  std::to_string(brokers.size()) + "]");
        }
    }

    for (const auto& f : spec.faults) {
        if (f.at_us < 0 || f.at_us > spec.duration_us) {
            throw ValidationError("fault '" + f.label + "': atTime outside [0, duration]");
        }
        bool link_kind = f.kind == FaultKind::LinkDown || f.kind == FaultKind::LinkUp ||
                         f.kind == FaultKind::SetLoss;
        if (link_kind) {
            if (!spec.find_link(f.target)) {
                throw ValidationError("fault '" + f.label + "': link '" + f.target +
                                      "' does not exist");
            }
            if (f.kind == FaultKind::SetLoss && (*f.param < 0.0 || *f.param > 100.0)) {
                throw ValidationError("fault '" + f.label + "': loss outside [0,100]");
            }
        } else {
            if (!node_ids.count(f.target)) {
                throw ValidationError("fault '" + f.label + "': node '" + f.target +
                                      "' does not exist");
            }
        }
    }

    // Cross-component references.
    for (const auto& n : spec.nodes) {
        if (n.producer) {
            for (const auto& [topic, w] : n.producer->topic_weights) {
                if (!topic_names.count(topic)) {
                    throw ValidationError("node '" + n.id + "': producer topic '" + topic +
                                          "' is not declared");
                }
            }
        }
        if (n.consumer) {
            for (const auto& topic : n.consumer->topics) {
                if (!topic_names.count(topic)) {
                    throw ValidationError("node '" + n.id + "': consumer topic '" + topic +
                                          "' is not declared");
                }
            }
        }
        if (n.job) {
            if (!topic_names.count(n.job->in_topic)) {
                throw ValidationError("node '" + n.id + "': job inTopic '" + n.job->in_topic +
                                      "' is not declared");
            }
            const std::string& out = n.job->out_topic;
            if (out.rfind("store:", 0) == 0) {
                const NodeSpec* sn = spec.find_node(out.substr(6));
                if (!sn || !sn->store) {
                    throw ValidationError("node '" + n.id + "': job outTopic '" + out +
                                          "' names no store-hosting node");
                }
            } else if (out != "sink" && !topic_names.count(out)) {
                throw ValidationError("node '" + n.id + "': job outTopic '" + out +
                                      "' is not declared");
            }
        }
    }
}

}  // namespace detail

/// Parses a GraphML experiment description plus its companion config files
/// into a validated ExperimentSpec. Unknown attribute keys are rejected.
inline ExperimentSpec parse_experiment(const std::string& graphml_text,
                                       const std::filesystem::path& config_dir) {
    namespace pt = boost::property_tree;
    pt::ptree doc;
    try {
        std::istringstream in(graphml_text);
        pt::read_xml(in, doc, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError(std::string("malformed GraphML: ") + e.what());
    }

    auto graphml = doc.get_child_optional("graphml");
    if (!graphml) throw ParseError("missing <graphml> root element");

    // <key> declarations: id -> (domain, attr.name)
    std::map<std::string, std::pair<std::string, std::string>> keys;
    for (const auto& [tag, child] : *graphml) {
        if (tag != "key") continue;
        std::string id = child.get<std::string>("<xmlattr>.id", "");
        std::string dom = child.get<std::string>("<xmlattr>.for", "");
        std::string name = child.get<std::string>("<xmlattr>.attr.name", id);
        if (id.empty()) throw ParseError("<key> without id");
        const std::set<std::string>* allowed = nullptr;
        if (dom == "graph") allowed = &detail::graph_attr_keys();
        else if (dom == "node") allowed = &detail::node_attr_keys();
        else if (dom == "edge") allowed = &detail::link_attr_keys();
        else throw ParseError("<key id='" + id + "'> has unsupported domain '" + dom + "'");
        if (!allowed->count(name)) {
            throw ParseError("unknown " + dom + " attribute key '" + name + "'");
        }
        keys[id] = {dom, name};
    }

    auto graph = graphml->get_child_optional("graph");
    if (!graph) throw ParseError("missing <graph> element");

    auto read_data = [&keys](const pt::ptree& el, const std::string& domain,
                             const std::string& owner) {
        std::map<std::string, std::string> out;
        for (const auto& [tag, child] : el) {
            if (tag != "data") continue;
            std::string kid = child.get<std::string>("<xmlattr>.key", "");
            auto it = keys.find(kid);
            if (it == keys.end()) {
                throw ParseError(owner + ": <data> references undeclared key '" + kid + "'");
            }
            if (it->second.first != domain) {
                throw ParseError(owner + ": key '" + it->second.second + "' is a " +
                                 it->second.first + " attribute, not a " + domain + " attribute");
            }
            if (!out.emplace(it->second.second, child.get_value<std::string>()).second) {
                throw ParseError(owner + ": duplicate attribute '" + it->second.second + "'");
            }
        }
        return out;
    };

    ExperimentSpec spec;
    spec.graph_id = graph->get<std::string>("<xmlattr>.id", "experiment");

    std::map<std::string, std::string> gattrs = read_data(*graph, "graph", "graph");
    if (auto it = gattrs.find("seed"); it != gattrs.end()) {
        spec.seed = static_cast<std::uint64_t>(detail::to_i64(it->second, "graph attribute seed"));
    }
    if (auto it = gattrs.find("duration"); it != gattrs.end()) {
        double d = detail::to_double(it->second, "graph attribute duration");
        if (d <= 0.0) throw ValidationError("duration must be > 0 seconds");
        spec.duration_us = us_from_seconds(d);
    }

    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            NodeSpec n;
            n.id = child.get<std::string>("<xmlattr>.id", "");
            if (n.id.empty()) throw ParseError("<node> without id");
            n.kind = detail::switch_id(n.id) ? NodeKind::Switch : NodeKind::Host;
            std::map<std::string, std::string> attrs = read_data(child, "node", "node " + n.id);
            auto opt = [&attrs](const char* k) -> std::optional<std::string> {
                auto it = attrs.find(k);
                if (it == attrs.end()) return std::nullopt;
                return it->second;
            };
            n.prod_type = opt("prodType");
            n.prod_cfg_ref = opt("prodCfg");
            n.cons_type = opt("consType");
            n.cons_cfg_ref = opt("consCfg");
            n.stream_proc_type = opt("streamProcType");
            n.stream_proc_cfg_ref = opt("streamProcCfg");
            n.store_type = opt("storeType");
            n.store_cfg_ref = opt("storeCfg");
            n.broker_cfg_ref = opt("brokerCfg");
            if (auto c = opt("cpuPercentage")) {
                n.cpu_percentage = detail::to_double(*c, "node " + n.id + " cpuPercentage");
            }
            spec.nodes.push_back(std::move(n));
        } else if (tag == "edge") {
            LinkSpec l;
            l.a = child.get<std::string>("<xmlattr>.source", "");
            l.b = child.get<std::string>("<xmlattr>.target", "");
            if (l.a.empty() || l.b.empty()) throw ParseError("<edge> without source/target");
            std::map<std::string, std::string> attrs =
                read_data(child, "edge", "link " + l.id());
            if (auto it = attrs.find("lat"); it != attrs.end()) {
                double ms = detail::to_double(it->second, "link " + l.id() + " lat");
                if (ms < 0) throw ValidationError("link '" + l.id() + "': lat must be >= 0 ms");
                l.lat_us = us_from_ms(ms);
            }
            if (auto it = attrs.find("bw"); it != attrs.end()) {
                l.bw_mbps = detail::to_double(it->second, "link " + l.id() + " bw");
            }
            if (auto it = attrs.find("loss"); it != attrs.end()) {
                l.loss_pct = detail::to_double(it->second, "link " + l.id() + " loss");
            }
            l.port_a = static_cast<int>(
                attrs.count("st") ? detail::to_i64(attrs.at("st"), "link " + l.id() + " st") : -1);
            l.port_b = static_cast<int>(
                attrs.count("dt") ? detail::to_i64(attrs.at("dt"), "link " + l.id() + " dt") : -1);
            spec.links.push_back(std::move(l));
        }
    }

    // Assign ports that were not declared: smallest unused number per node.
    {
        std::map<std::string, std::set<int>> used;
        for (const auto& l : spec.links) {
            if (l.port_a >= 0) used[l.a].insert(l.port_a);
            if (l.port_b >= 0) used[l.b].insert(l.port_b);
        }
        auto next_port = [&used](const std::string& node) {
            int p = 1;
            while (used[node].count(p)) ++p;
            used[node].insert(p);
            return p;
        };
        for (auto& l : spec.links) {
            if (l.port_a < 0) l.port_a = next_port(l.a);
            if (l.port_b < 0) l.port_b = next_port(l.b);
        }
    }

    // Companion config files.
    if (auto it = gattrs.find("topicCfg"); it != gattrs.end()) {
        spec.topic_cfg_ref = it->second;
        spec.topics = detail::parse_topic_rows(
            detail::resolve_config(config_dir, it->second, "graph topicCfg"));
    }
    if (auto it = gattrs.find("faultCfg"); it != gattrs.end()) {
        spec.fault_cfg_ref = it->second;
        spec.faults = detail::parse_fault_rows(
            detail::resolve_config(config_dir, it->second, "graph faultCfg"));
    }

    for (auto& n : spec.nodes) {
        const std::string owner = "node " + n.id;
        if (n.prod_type && !n.prod_cfg_ref) {
            throw ValidationError(owner + ": prodType without prodCfg");
        }
        if (n.prod_cfg_ref && !n.prod_type) {
            throw ValidationError(owner + ": prodCfg without prodType");
        }
        if (n.prod_type) {
            n.producer = detail::parse_producer_settings(
                detail::resolve_config(config_dir, *n.prod_cfg_ref, owner), *n.prod_type,
                config_dir, owner);
        }
        if (n.cons_cfg_ref && !n.cons_type) {
            throw ValidationError(owner + ": consCfg without consType");
        }
        if (n.cons_type) {
            if (!n.cons_cfg_ref) throw ValidationError(owner + ": consType without consCfg");
            n.consumer = detail::parse_consumer_settings(
                detail::resolve_config(config_dir, *n.cons_cfg_ref, owner));
        }
        if (n.stream_proc_cfg_ref && !n.stream_proc_type) {
            throw ValidationError(owner + ": streamProcCfg without streamProcType");
        }
        if (n.stream_proc_type) {
            if (!n.stream_proc_cfg_ref) {
                throw ValidationError(owner + ": streamProcType without streamProcCfg");
            }
            n.job = detail::parse_job_settings(
                detail::resolve_config(config_dir, *n.stream_proc_cfg_ref, owner));
        }
        if (n.store_cfg_ref && !n.store_type) {
            throw ValidationError(owner + ": storeCfg without storeType");
        }
        if (n.store_type) {
            n.store = n.store_cfg_ref
                          ? detail::parse_store_settings(
                                detail::resolve_config(config_dir, *n.store_cfg_ref, owner))
                          : StoreSettings{};
        }
        if (n.broker_cfg_ref) {
            n.broker = detail::parse_broker_settings(
                detail::resolve_config(config_dir, *n.broker_cfg_ref, owner));
        }
    }

    detail::validate_spec(spec);
    return spec;
}

inline ExperimentSpec load_experiment(const std::filesystem::path& graphml_path) {
    std::ifstream in(graphml_path);
    if (!in) throw IoError("cannot open " + graphml_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment(buf.str(), graphml_path.parent_path());
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace detail

/// Canonical GraphML emission; parse_experiment(serialize_graphml(spec), dir)
/// with the original config dir reproduces an equal spec.
inline std::string serialize_graphml(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<graphml>\n";
    auto key = [&os](const char* name, const char* dom) {
        os << "  <key id=\"" << name << "\" for=\"" << dom << "\" attr.name=\"" << name
           << "\" attr.type=\"string\"/>\n";
    };
    for (const char* k : {"topicCfg", "faultCfg", "seed", "duration"}) key(k, "graph");
    for (const char* k : {"prodType", "prodCfg", "consType", "consCfg", "streamProcType",
                          "streamProcCfg", "storeType", "storeCfg", "brokerCfg",
                          "cpuPercentage"})
        key(k, "node");
    for (const char* k : {"lat", "bw", "loss", "st", "dt"}) key(k, "edge");

    os << "  <graph id=\"" << detail::xml_escape(spec.graph_id) << "\" edgedefault=\"undirected\">\n";
    auto data = [&os](int indent, const std::string& k, const std::string& v) {
        os << std::string(indent, ' ') << "<data key=\"" << k << "\">" << detail::xml_escape(v)
           << "</data>\n";
    };
    if (!spec.topic_cfg_ref.empty()) data(4, "topicCfg", spec.topic_cfg_ref);
    if (!spec.fault_cfg_ref.empty()) data(4, "faultCfg", spec.fault_cfg_ref);
    data(4, "seed", std::to_string(spec.seed));
    data(4, "duration", detail::trim_number(seconds_from_us(spec.duration_us)));

    for (const auto& n : spec.nodes) {
        os << "    <node id=\"" << detail::xml_escape(n.id) << "\">";
        bool any = false;
        std::ostringstream body;
        auto ndata = [&body, &any](const std::string& k, const std::optional<std::string>& v) {
            if (!v) return;
            body << "\n      <data key=\"" << k << "\">" << detail::xml_escape(*v) << "</data>";
            any = true;
        };
        ndata("prodType", n.prod_type);
        ndata("prodCfg", n.prod_cfg_ref);
        ndata("consType", n.cons_type);
        ndata("consCfg", n.cons_cfg_ref);
        ndata("streamProcType", n.stream_proc_type);
        ndata("streamProcCfg", n.stream_proc_cfg_ref);
        ndata("storeType", n.store_type);
        ndata("storeCfg", n.store_cfg_ref);
        ndata("brokerCfg", n.broker_cfg_ref);
        if (n.cpu_percentage != 1.0) {
            ndata("cpuPercentage", detail::trim_number(n.cpu_percentage));
        }
        if (any) {
            os << body.str() << "\n    </node>\n";
        } else {
            os << "</node>\n";
        }
    }
    for (const auto& l : spec.links) {
        os << "    <edge source=\"" << detail::xml_escape(l.a) << "\" target=\""
           << detail::xml_escape(l.b) << "\">\n";
        data(6, "lat", detail::trim_number(static_cast<double>(l.lat_us) / kUsPerMs));
        data(6, "bw", detail::trim_number(l.bw_mbps));
        data(6, "loss", detail::trim_number(l.loss_pct));
        data(6, "st", std::to_string(l.port_a));
        data(6, "dt", std::to_string(l.port_b));
        os << "    </edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

}  // namespace streamforge
