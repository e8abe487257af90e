#pragma once

#include <string>

#include "streamforge/runtime.hpp"

namespace streamforge {

namespace detail {
inline std::string fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::LinkDown: return "linkDown";
        case FaultKind::LinkUp: return "linkUp";
        case FaultKind::NodeCrash: return "nodeCrash";
        case FaultKind::NodeRecover: return "nodeRecover";
        case FaultKind::SetLoss: return "setLoss";
    }
    return "?";
}
}  // namespace detail

/// Plays a validated fault schedule into the network and the components,
/// each entry exactly once at its prescribed simulated time.
class FaultInjector {
  public:
    FaultInjector(Runtime& rt, Network& net) : rt_(rt), net_(net) {}

    void schedule_all(const std::vector<FaultSpec>& faults) {
        for (const FaultSpec& f : faults) {
            rt_.engine().schedule(f.at_us, "faults", [this, f] { apply(f); });
        }
    }

    void apply(const FaultSpec& f) {
        switch (f.kind) {
            case FaultKind::LinkDown:
                net_.set_link_up(f.target, false);
                break;
            case FaultKind::LinkUp:
                net_.set_link_up(f.target, true);
                break;
            case FaultKind::SetLoss:
                net_.set_loss(f.target, *f.param);
                break;
            case FaultKind::NodeCrash:
            case FaultKind::NodeRecover: {
                bool found = false;
                for (const auto& [id, comp] : rt_.components()) {
                    if (comp->node() != f.target) continue;
                    found = true;
                    if (f.kind == FaultKind::NodeCrash) {
                        if (comp->up()) comp->crash();
                    } else {
                        if (!comp->up()) comp->recover();
                    }
                }
                if (!found) {
                    throw ValidationError("fault '" + f.label + "': no components on node '" +
                                          f.target + "'");
                }
                break;
            }
        }
        std::string detail = "kind=" + detail::fault_kind_name(f.kind) + " target=" + f.target;
        if (f.param) detail += " param=" + std::to_string(*f.param);
        rt_.metrics().log_event(rt_.now(), "faults", "FaultApplied", detail);
    }

  private:
    Runtime& rt_;
    Network& net_;
};

}  // namespace streamforge
