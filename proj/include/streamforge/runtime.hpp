#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamforge/engine.hpp"
#include "streamforge/metrics.hpp"
#include "streamforge/net.hpp"
#include "streamforge/protocol.hpp"
#include "streamforge/random.hpp"
#include "streamforge/spec.hpp"

namespace streamforge {

/// Anything that lives on a node and exchanges protocol messages: brokers,
/// the controller, producers, consumers, operator jobs, stores.
class Component {
  public:
    Component(std::string id, std::string node) : id_(std::move(id)), node_(std::move(node)) {}
    virtual ~Component() = default;

    const std::string& id() const { return id_; }
    const std::string& node() const { return node_; }
    bool up() const { return up_; }
    std::uint64_t generation() const { return generation_; }

    virtual void start() {}
    virtual void handle(Message&& m) = 0;

    void crash() {
        up_ = false;
        ++generation_;  // invalidates every outstanding timer
        on_crash();
    }
    void recover() {
        up_ = true;
        ++generation_;
        on_recover();
    }

  protected:
    virtual void on_crash() {}
    virtual void on_recover() {}

  private:
    std::string id_;
    std::string node_;
    bool up_ = true;
    std::uint64_t generation_ = 0;
};

/// Shared context handed to every component: the clock, the wire, the
/// metrics sink, and the component directory.
class Runtime {
  public:
    Runtime(Engine& eng, Network& net, MetricsStore& metrics, const ExperimentSpec& spec)
        : eng_(eng), net_(net), metrics_(metrics), spec_(spec) {}

    Engine& engine() { return eng_; }
    Network& net() { return net_; }
    MetricsStore& metrics() { return metrics_; }
    const ExperimentSpec& spec() const { return spec_; }
    SimTime now() const { return eng_.now(); }

    void add_component(Component* c) {
        components_[c->id()] = c;
        node_of_[c->id()] = c->node();
    }
    Component* find(const std::string& id) {
        auto it = components_.find(id);
        return it == components_.end() ? nullptr : it->second;
    }
    const std::map<std::string, Component*>& components() const { return components_; }

    const std::string& controller_id() const { return controller_id_; }
    void set_controller_id(std::string id) { controller_id_ = std::move(id); }

    /// Every component interested in metadata pushes, in deterministic order.
    const std::vector<std::string>& metadata_subscribers() const { return metadata_subs_; }
    void add_metadata_subscriber(const std::string& id) { metadata_subs_.push_back(id); }

    void send(const Component& from, const std::string& to, MessageBody body) {
        auto it = node_of_.find(to);
        if (it == node_of_.end()) return;  // destination never existed; drop
        Message m;
        m.from = from.id();
        m.to = to;
        m.body = std::move(body);
        net_.send_frame(from.node(), it->second, std::move(m));
    }

    /// One-shot timer invalidated by crash/recover generation bumps.
    void timer(Component& c, SimTime delay, std::function<void()> fn) {
        std::uint64_t gen = c.generation();
        Component* cp = &c;
        eng_.schedule_in(delay, c.id(), [cp, gen, fn = std::move(fn)] {
            if (cp->up() && cp->generation() == gen) fn();
        });
    }

    /// Fixed-interval tick active until the component crashes.
    void periodic(Component& c, SimTime interval, std::function<void()> fn) {
        std::uint64_t gen = c.generation();
        Component* cp = &c;
        auto shared = std::make_shared<std::function<void()>>(std::move(fn));
        schedule_periodic(cp, gen, interval, shared);
    }

    void log(const Component& c, const std::string& kind, const std::string& detail) {
        metrics_.log_event(eng_.now(), c.id(), kind, detail);
    }

    /// Deterministic per-component random stream.
    RandomSource make_rng(const std::string& component_id) const {
        return RandomSource(spec_.seed, component_id);
    }

    /// Delivery entry point wired to the network: messages to components that
    /// are down (or never existed) vanish, like traffic to a dead process.
    void dispatch(Message&& m) {
        auto it = components_.find(m.to);
        if (it == components_.end() || !it->second->up()) return;
        it->second->handle(std::move(m));
    }

  private:
    void schedule_periodic(Component* cp, std::uint64_t gen, SimTime interval,
                           std::shared_ptr<std::function<void()>> fn) {
        eng_.schedule_in(interval, cp->id(), [this, cp, gen, interval, fn] {
            if (!cp->up() || cp->generation() != gen) return;
            (*fn)();
            schedule_periodic(cp, gen, interval, fn);
        });
    }

    Engine& eng_;
    Network& net_;
    MetricsStore& metrics_;
    const ExperimentSpec& spec_;
    std::map<std::string, Component*> components_;
    std::map<std::string, std::string> node_of_;
    std::vector<std::string> metadata_subs_;
    std::string controller_id_;
};

}  // namespace streamforge
