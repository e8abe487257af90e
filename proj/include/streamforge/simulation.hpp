#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamforge/broker.hpp"
#include "streamforge/faults.hpp"
#include "streamforge/workload.hpp"

namespace streamforge {

constexpr SimTime kDefaultPortSampleUs = 500 * kUsPerMs;

struct SimOptions {
    SimTime port_sample_us = kDefaultPortSampleUs;
};

/// One complete experiment run: builds every component from the spec, plays
/// the fault schedule, runs the event loop to the configured duration, and
/// leaves the metrics store ready for export.
class Simulation {
  public:
    explicit Simulation(ExperimentSpec spec, SimOptions opt = {})
        : spec_(std::move(spec)),
          opt_(opt),
          net_(eng_, spec_, metrics_),
          rt_(eng_, net_, metrics_, spec_),
          faults_(rt_, net_) {
        net_.set_deliver([this](Message&& m) { rt_.dispatch(std::move(m)); });

        std::vector<std::string> broker_nodes = spec_.broker_nodes();
        if (!broker_nodes.empty()) {
            rt_.set_controller_id(broker_nodes.front() + ".ctl");
        }

        for (const NodeSpec& n : spec_.nodes) {
            if (n.broker) {
                add(std::make_unique<Broker>(rt_, n.id, *n.broker));
            }
            if (n.producer) {
                add(std::make_unique<ProducerStub>(rt_, n.id, *n.producer));
            }
            if (n.consumer) {
                add(std::make_unique<ConsumerStub>(rt_, n.id, *n.consumer));
            }
            if (n.job) {
                add(std::make_unique<OperatorJob>(rt_, n.id, *n.job, n.cpu_percentage));
            }
            if (n.store) {
                add(std::make_unique<KVStoreStub>(rt_, n.id, *n.store));
            }
        }
        if (!broker_nodes.empty()) {
            const NodeSpec* ctl_node = spec_.find_node(broker_nodes.front());
            add(std::make_unique<Controller>(rt_, ctl_node->id, *ctl_node->broker));
            controller_ = static_cast<Controller*>(rt_.find(rt_.controller_id()));
            controller_->init_liveness(broker_comps());
        }

        for (const auto& [id, comp] : rt_.components()) {
            if (id.ends_with(".broker") || id.ends_with(".prod") || id.ends_with(".cons") ||
                id.ends_with(".spe")) {
                rt_.add_metadata_subscriber(id);
            }
        }

        // topics: replica placement, initial leadership, believed leaders
        for (const TopicSpec& t : spec_.topics) {
            std::vector<std::string> replica_nodes = assign_replicas(t, broker_nodes);
            std::vector<std::string> replica_comps;
            for (const auto& rn : replica_nodes) replica_comps.push_back(rn + ".broker");
            for (const auto& bn : broker_nodes) {
                static_cast<Broker*>(rt_.find(bn + ".broker"))->init_topic(t, replica_comps);
            }
            controller_->init_topic(t, replica_comps);

            std::set<std::string> subscribers;
            std::string leader_comp = t.preferred_leader + ".broker";
            for (const NodeSpec& n : spec_.nodes) {
                if (n.producer && n.producer->topic_weights.count(t.name)) {
                    static_cast<ProducerStub*>(rt_.find(n.id + ".prod"))
                        ->port()
                        .set_leader(t.name, leader_comp);
                }
                if (n.consumer &&
                    std::find(n.consumer->topics.begin(), n.consumer->topics.end(), t.name) !=
                        n.consumer->topics.end()) {
                    static_cast<ConsumerStub*>(rt_.find(n.id + ".cons"))
                        ->fetch()
                        .subscribe(t.name, leader_comp);
                    subscribers.insert(n.id + ".cons");
                }
                if (n.job) {
                    if (n.job->in_topic == t.name) {
                        static_cast<OperatorJob*>(rt_.find(n.id + ".spe"))
                            ->fetch()
                            .subscribe(t.name, leader_comp);
                        subscribers.insert(n.id + ".spe");
                    }
                    if (n.job->out_topic == t.name) {
                        static_cast<OperatorJob*>(rt_.find(n.id + ".spe"))
                            ->port()
                            .set_leader(t.name, leader_comp);
                    }
                }
            }
            metrics_.set_subscribers(t.name, std::move(subscribers));
        }

        faults_.schedule_all(spec_.faults);
        schedule_port_sample(0);
        for (const auto& [id, comp] : rt_.components()) comp->start();
    }

    /// Runs to the spec duration and freezes end-of-run state into metrics.
    void run() {
        eng_.run_until(spec_.duration_us);
        for (const TopicSpec& t : spec_.topics) {
            std::set<RecordId> ids;
            std::string leader_comp = controller_ ? controller_->topic(t.name).leader : "";
            if (!leader_comp.empty()) {
                const auto& log =
                    static_cast<Broker*>(rt_.find(leader_comp))->topic(t.name).log;
                for (const auto& e : log) ids.insert(e.rec.id());
            }
            metrics_.set_final_log(t.name, std::move(ids));
        }
        for (const auto& [id, comp] : rt_.components()) {
            if (auto* job = dynamic_cast<OperatorJob*>(comp)) job->dump_state();
            if (auto* store = dynamic_cast<KVStoreStub*>(comp)) store->dump_state();
        }
    }

    void export_all(const std::filesystem::path& out_dir) const {
        metrics_.export_all(out_dir, spec_.duration_us);
    }
    Summary summarize() const { return metrics_.summarize(spec_.duration_us); }

    const ExperimentSpec& spec() const { return spec_; }
    Engine& engine() { return eng_; }
    Network& network() { return net_; }
    Runtime& runtime() { return rt_; }
    MetricsStore& metrics() { return metrics_; }
    const MetricsStore& metrics() const { return metrics_; }
    Controller* controller() { return controller_; }
    Broker* broker(const std::string& node) {
        return static_cast<Broker*>(rt_.find(node + ".broker"));
    }
    ProducerStub* producer(const std::string& node) {
        return static_cast<ProducerStub*>(rt_.find(node + ".prod"));
    }
    ConsumerStub* consumer(const std::string& node) {
        return static_cast<ConsumerStub*>(rt_.find(node + ".cons"));
    }
    OperatorJob* job(const std::string& node) {
        return static_cast<OperatorJob*>(rt_.find(node + ".spe"));
    }
    KVStoreStub* store(const std::string& node) {
        return static_cast<KVStoreStub*>(rt_.find(node + ".store"));
    }

  private:
    void add(std::unique_ptr<Component> c) {
        rt_.add_component(c.get());
        owned_.push_back(std::move(c));
    }
    std::vector<std::string> broker_comps() const {
        std::vector<std::string> out;
        for (const auto& b : spec_.broker_nodes()) out.push_back(b + ".broker");
        return out;
    }
    void schedule_port_sample(SimTime t) {
        eng_.schedule(t, "sampler", [this, t] {
            net_.sample_ports();
            SimTime next = t + opt_.port_sample_us;
            if (t < spec_.duration_us) {
                schedule_port_sample(std::min(next, spec_.duration_us));
            }
        });
    }

    ExperimentSpec spec_;
    SimOptions opt_;
    Engine eng_;
    MetricsStore metrics_;
    Network net_;
    Runtime rt_;
    FaultInjector faults_;
    std::vector<std::unique_ptr<Component>> owned_;
    Controller* controller_ = nullptr;
};

}  // namespace streamforge
