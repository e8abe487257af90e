#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "streamforge/runtime.hpp"

namespace streamforge {

/// Static replica placement: the preferred leader plus the next
/// (replicationFactor - 1) broker ids in sorted circular order.
inline std::vector<std::string> assign_replicas(const TopicSpec& topic,
                                                const std::vector<std::string>& brokers) {
    std::vector<std::string> out{topic.preferred_leader};
    auto it = std::find(brokers.begin(), brokers.end(), topic.preferred_leader);
    std::size_t start = static_cast<std::size_t>(it - brokers.begin());
    for (int k = 1; k < topic.replication_factor; ++k) {
        out.push_back(brokers[(start + static_cast<std::size_t>(k)) % brokers.size()]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Replicated pub/sub broker: per-topic log, leadership belief, follower
/// tracking, parked long-poll fetches, and the zk/raft acknowledgement split.
class Broker : public Component {
  public:
    struct TopicState {
        // replica state (survives crashes: durable log semantics)
        std::vector<LogEntry> log;
        std::map<RecordId, std::int64_t> index;
        std::int64_t hw = 0;
        std::uint64_t epoch = 0;
        std::string leader;
        std::vector<std::string> replicas;
        ConsistencyMode mode = ConsistencyMode::Zk;
        std::set<RecordId> acked_by_me;

        // leader-side volatile state
        std::map<std::string, std::int64_t> acked_end;
        std::map<std::string, SimTime> caught_up_at;
        std::set<std::string> isr;
        std::map<std::int64_t, std::pair<std::string, std::uint64_t>> pending_ack;
        bool transfer_pending = false;
        std::string transfer_to;
        SimTime elected_at = -1;
        bool backlog_watch = false;

        // follower-side
        bool reconciling = false;

        // raft election sync
        bool become_pending = false;
        std::uint64_t become_epoch = 0;
        std::set<std::string> sync_waiting;
        std::map<std::string, std::int64_t> sync_ends;

        struct Parked {
            std::string consumer;
            std::int64_t from = 0;
            std::uint64_t req_id = 0;
            SimTime deadline = 0;
        };
        std::vector<Parked> parked;

        std::int64_t end() const { return static_cast<std::int64_t>(log.size()); }
        bool leads(const std::string& me) const { return leader == me; }
    };

    Broker(Runtime& rt, std::string node, BrokerSettings settings)
        : Component(node + ".broker", node), rt_(rt), cfg_(settings) {}

    void init_topic(const TopicSpec& t, const std::vector<std::string>& replicas) {
        TopicState st;
        st.epoch = 1;
        st.leader = replicas.empty() ? "" : t.preferred_leader + ".broker";
        st.replicas = replicas;  // component ids
        st.mode = t.mode;
        if (st.leads(id())) {
            st.isr.insert(replicas.begin(), replicas.end());
            for (const auto& r : replicas) {
                if (r != id()) st.acked_end[r] = 0;
                st.caught_up_at[r] = 0;
            }
            st.elected_at = 0;
        }
        topics_.emplace(t.name, std::move(st));
    }

    const TopicState& topic(const std::string& name) const { return topics_.at(name); }
    bool isolated() const { return isolated_; }
    const BrokerSettings& settings() const { return cfg_; }

    void start() override {
        last_controller_contact_ = rt_.now();
        heartbeat();
        rt_.periodic(*this, cfg_.heartbeat_us, [this] { heartbeat(); });
        rt_.periodic(*this, cfg_.heartbeat_us, [this] { house_keeping(); });
    }

    void handle(Message&& m) override {
        std::visit(
            [this, &m](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgProduce>) on_produce(m.from, body);
                else if constexpr (std::is_same_v<T, MsgFetch>) on_fetch(m.from, body);
                else if constexpr (std::is_same_v<T, MsgReplicate>) on_replicate(m.from, body);
                else if constexpr (std::is_same_v<T, MsgReplicateAck>) on_replicate_ack(body);
                else if constexpr (std::is_same_v<T, MsgHeartbeatAck>) {
                    last_controller_contact_ = rt_.now();
                    if (isolated_) {
                        isolated_ = false;
                        rt_.log(*this, "IsolationEnded", "");
                    }
                }
                else if constexpr (std::is_same_v<T, MsgMetadata>) on_metadata(body);
                else if constexpr (std::is_same_v<T, MsgBecomeLeader>) on_become_leader(body);
                else if constexpr (std::is_same_v<T, MsgSyncQuery>) {
                    rt_.send(*this, m.from, MsgSyncInfo{body.topic, topics_.at(body.topic).end()});
                }
                else if constexpr (std::is_same_v<T, MsgSyncInfo>) on_sync_info(m.from, body);
                else if constexpr (std::is_same_v<T, MsgSyncPull>) {
                    TopicState& st = topics_.at(body.topic);
                    MsgSyncData data{body.topic, body.from, {}};
                    for (std::int64_t o = body.from; o < st.end(); ++o) {
                        data.entries.push_back(st.log[static_cast<std::size_t>(o)]);
                    }
                    rt_.send(*this, m.from, std::move(data));
                }
                else if constexpr (std::is_same_v<T, MsgSyncData>) on_sync_data(body);
                else if constexpr (std::is_same_v<T, MsgPrepareTransfer>) on_prepare_transfer(body);
                else if constexpr (std::is_same_v<T, MsgReconcile>) on_reconcile(m.from, body);
                else if constexpr (std::is_same_v<T, MsgReconcileResp>) on_reconcile_resp(body);
            },
            std::move(m.body));
    }

  protected:
    void on_crash() override {
        // process dies, disk survives: wipe volatile leader/follower state
        for (auto& [name, st] : topics_) {
            st.parked.clear();
            st.pending_ack.clear();
            st.transfer_pending = false;
            st.become_pending = false;
            st.sync_waiting.clear();
            st.reconciling = false;
        }
    }
    void on_recover() override {
        last_controller_contact_ = rt_.now();
        isolated_ = false;
        heartbeat();
        rt_.periodic(*this, cfg_.heartbeat_us, [this] { heartbeat(); });
        rt_.periodic(*this, cfg_.heartbeat_us, [this] { house_keeping(); });
    }

  private:
    void heartbeat() { rt_.send(*this, rt_.controller_id(), MsgHeartbeat{id()}); }

    void house_keeping() {
        bool was = isolated_;
        isolated_ = rt_.now() - last_controller_contact_ > cfg_.session_timeout_us;
        if (isolated_ && !was) {
            rt_.log(*this, "IsolationDetected",
                    "last_contact=" + format_us(last_controller_contact_));
        }
        if (isolated_) return;
        for (auto& [name, st] : topics_) {
            if (!st.leads(id())) continue;
            maintain_isr(name, st);
        }
    }

    void maintain_isr(const std::string& name, TopicState& st) {
        bool changed = false;
        for (const auto& r : st.replicas) {
            if (r == id()) continue;
            auto acked = st.acked_end.count(r) ? st.acked_end.at(r) : 0;
            bool caught = acked == st.end();
            if (caught) st.caught_up_at[r] = rt_.now();
            SimTime last = st.caught_up_at.count(r) ? st.caught_up_at.at(r) : 0;
            if (st.isr.count(r) && rt_.now() - last > cfg_.replica_lag_max_us) {
                st.isr.erase(r);
                changed = true;
            } else if (!st.isr.count(r) && caught) {
                st.isr.insert(r);
                changed = true;
            }
        }
        if (changed) {
            advance_hw(name, st);
            std::vector<std::string> isr(st.isr.begin(), st.isr.end());
            rt_.send(*this, rt_.controller_id(), MsgIsrUpdate{name, st.epoch, std::move(isr)});
        }
    }

    // ---- produce path ---------------------------------------------------------
    void on_produce(const std::string& from, MsgProduce& msg) {
        auto it = topics_.find(msg.topic);
        if (it == topics_.end()) {
            rt_.send(*this, from, MsgProduceResp{msg.topic, ProduceStatus::UnknownTopic, {}});
            return;
        }
        TopicState& st = it->second;
        if (!st.leads(id())) {
            rt_.send(*this, from, MsgProduceResp{msg.topic, ProduceStatus::NotLeader, {}});
            return;
        }
        if (isolated_ || st.transfer_pending || st.become_pending) {
            rt_.send(*this, from, MsgProduceResp{msg.topic, ProduceStatus::Rejected, {}});
            return;
        }
        MsgProduceResp resp{msg.topic, ProduceStatus::Ok, {}};
        std::vector<Record> appended;
        for (Record& r : msg.records) {
            auto dup = st.index.find(r.id());
            std::int64_t offset;
            if (dup != st.index.end()) {
                offset = dup->second;
            } else {
                offset = st.end();
                st.index[r.id()] = offset;
                rt_.metrics().on_committed(r.id(), st.epoch, rt_.now());
                st.log.push_back(LogEntry{r, offset});
                appended.push_back(r);
            }
            if (st.mode == ConsistencyMode::Zk) {
                resp.acked.emplace_back(r.seq, offset);
                st.acked_by_me.insert(r.id());
            } else {
                if (offset < st.hw) {
                    resp.acked.emplace_back(r.seq, offset);  // already committed earlier
                } else {
                    st.pending_ack[offset] = {from, r.seq};
                }
            }
        }
        if (!appended.empty()) {
            std::int64_t base = st.end() - static_cast<std::int64_t>(appended.size());
            for (const auto& r : st.replicas) {
                if (r == id()) continue;
                rt_.send(*this, r, MsgReplicate{msg.topic, st.epoch, id(), base, appended, st.hw});
            }
        }
        advance_hw(msg.topic, st);
        if (st.mode == ConsistencyMode::Zk || !resp.acked.empty()) {
            rt_.send(*this, from, std::move(resp));
        }
    }

    void advance_hw(const std::string& name, TopicState& st) {
        if (!st.leads(id())) return;
        std::int64_t candidate;
        if (st.mode == ConsistencyMode::Zk) {
            candidate = st.end();
            for (const auto& r : st.isr) {
                if (r == id()) continue;
                candidate = std::min(candidate, st.acked_end.count(r) ? st.acked_end.at(r) : 0);
            }
        } else {
            std::vector<std::int64_t> ends{st.end()};
            for (const auto& r : st.replicas) {
                if (r == id()) continue;
                ends.push_back(st.acked_end.count(r) ? st.acked_end.at(r) : 0);
            }
            std::sort(ends.rbegin(), ends.rend());
            std::size_t quorum = st.replicas.size() / 2;  // majority index (0-based)
            candidate = ends[quorum];
        }
        if (candidate <= st.hw) return;
        st.hw = candidate;
        if (st.mode == ConsistencyMode::Raft) {
            // committed: acknowledge producers waiting below the new watermark
            std::map<std::string, MsgProduceResp> by_producer;
            for (auto it = st.pending_ack.begin();
                 it != st.pending_ack.end() && it->first < st.hw;) {
                auto& resp = by_producer[it->second.first];
                resp.topic = name;
                resp.acked.emplace_back(it->second.second, it->first);
                st.acked_by_me.insert(st.log[static_cast<std::size_t>(it->first)].rec.id());
                it = st.pending_ack.erase(it);
            }
            for (auto& [producer, resp] : by_producer) {
                rt_.send(*this, producer, std::move(resp));
            }
        }
        serve_parked(name, st);
        transfer_check(name, st);
    }

    // ---- fetch path -------------------------------------------------------------
    void on_fetch(const std::string& from, MsgFetch& msg) {
        auto it = topics_.find(msg.topic);
        if (it == topics_.end() || !it->second.leads(id())) {
            rt_.send(*this, from,
                     MsgFetchResp{msg.topic, msg.req_id, FetchStatus::NotLeader, 0, {}, 0});
            return;
        }
        TopicState& st = it->second;
        if (msg.from_offset > st.hw) {
            rt_.send(*this, from,
                     MsgFetchResp{msg.topic, msg.req_id, FetchStatus::OutOfRange, msg.from_offset,
                                  {}, st.hw});
            return;
        }
        std::erase_if(st.parked, [&from](const TopicState::Parked& p) {
            return p.consumer == from;  // a newer fetch replaces the old one
        });
        TopicState::Parked p{from, msg.from_offset, msg.req_id,
                             rt_.now() + cfg_.fetch_max_wait_us};
        if (!maybe_respond(msg.topic, st, p, false)) {
            st.parked.push_back(p);
            rt_.timer(*this, cfg_.fetch_max_wait_us, [this, name = msg.topic, consumer = from,
                                                      req = msg.req_id] {
                auto t = topics_.find(name);
                if (t == topics_.end()) return;
                for (auto& parked : t->second.parked) {
                    if (parked.consumer == consumer && parked.req_id == req) {
                        TopicState::Parked copy = parked;
                        std::erase_if(t->second.parked, [&](const TopicState::Parked& q) {
                            return q.consumer == consumer && q.req_id == req;
                        });
                        maybe_respond(name, t->second, copy, true);
                        return;
                    }
                }
            });
        }
    }

    /// Answers a fetch if enough data is buffered (or the wait expired).
    /// Returns true when a response went out.
    bool maybe_respond(const std::string& name, TopicState& st, const TopicState::Parked& p,
                       bool deadline_hit) {
        std::int64_t avail_bytes = 0;
        for (std::int64_t o = p.from; o < st.hw; ++o) {
            avail_bytes += st.log[static_cast<std::size_t>(o)].rec.size_bytes;
        }
        if (!deadline_hit && avail_bytes < cfg_.fetch_min_bytes) return false;
        MsgFetchResp resp{name, p.req_id, FetchStatus::Ok, p.from, {}, st.hw};
        std::int64_t backlog_bytes = 0;
        std::int64_t backlog_records = 0;
        for (std::int64_t o = p.from; o < st.hw; ++o) {
            const LogEntry& e = st.log[static_cast<std::size_t>(o)];
            resp.entries.push_back(e);
            if (st.backlog_watch && e.rec.produce_us < st.elected_at) {
                backlog_bytes += e.rec.size_bytes;
                ++backlog_records;
            }
        }
        if (st.backlog_watch && backlog_records > 0) {
            st.backlog_watch = false;
            rt_.log(*this, "BacklogServed",
                    "topic=" + name + " consumer=" + p.consumer +
                        " records=" + std::to_string(backlog_records) +
                        " bytes=" + std::to_string(backlog_bytes));
        }
        rt_.send(*this, p.consumer, std::move(resp));
        return true;
    }

    void serve_parked(const std::string& name, TopicState& st) {
        std::vector<TopicState::Parked> still;
        for (const auto& p : st.parked) {
            if (!maybe_respond(name, st, p, false)) still.push_back(p);
        }
        st.parked = std::move(still);
    }

    // ---- replication ------------------------------------------------------------
    // base_offset + records.size() always equals the leader's log end at send
    // time, so a follower holding entries beyond it has left the leadership
    // lineage and trims back to it.
    void on_replicate(const std::string& from, MsgReplicate& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (msg.epoch < st.epoch) return;  // stale leader
        if (msg.epoch > st.epoch) adopt_epoch(msg.topic, st, msg.epoch, msg.leader);
        if (st.leads(id()) || st.reconciling) return;
        std::int64_t leader_end =
            msg.base_offset + static_cast<std::int64_t>(msg.records.size());
        std::int64_t trim_to = st.end() > leader_end ? leader_end : st.end();
        for (std::int64_t o = msg.base_offset; o < trim_to; ++o) {
            if (st.log[static_cast<std::size_t>(o)].rec.id() !=
                msg.records[static_cast<std::size_t>(o - msg.base_offset)].id()) {
                trim_to = o;  // diverged suffix starts here
                break;
            }
        }
        if (st.end() > trim_to && trim_to >= msg.base_offset) {
            std::int64_t count = st.end() - trim_to;
            truncate_follower(st, trim_to);
            rt_.log(*this, "FollowerTruncated",
                    "topic=" + msg.topic + " count=" + std::to_string(count));
        }
        if (msg.base_offset <= st.end()) {
            std::int64_t skip = st.end() - msg.base_offset;
            for (std::size_t i = static_cast<std::size_t>(skip); i < msg.records.size(); ++i) {
                const Record& r = msg.records[i];
                st.index[r.id()] = st.end();
                st.log.push_back(LogEntry{r, st.end()});
            }
        }
        st.hw = std::min(std::max(st.hw, std::min(msg.hw, st.end())), st.end());
        rt_.send(*this, from, MsgReplicateAck{msg.topic, st.epoch, id(), st.end()});
    }

    void truncate_follower(TopicState& st, std::int64_t to) {
        while (st.end() > to) {
            const RecordId rid = st.log.back().rec.id();
            rt_.metrics().on_truncated(rid);
            st.index.erase(rid);
            st.log.pop_back();
        }
    }

    void on_replicate_ack(MsgReplicateAck& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (msg.epoch != st.epoch || !st.leads(id())) return;
        st.acked_end[msg.broker] = msg.acked_end;
        if (msg.acked_end == st.end()) st.caught_up_at[msg.broker] = rt_.now();
        if (msg.acked_end < st.end()) {
            // follower is behind: push the missing suffix
            MsgReplicate fill{msg.topic, st.epoch, id(), msg.acked_end, {}, st.hw};
            for (std::int64_t o = msg.acked_end; o < st.end(); ++o) {
                fill.records.push_back(st.log[static_cast<std::size_t>(o)].rec);
            }
            rt_.send(*this, msg.broker, std::move(fill));
        }
        advance_hw(msg.topic, st);
        transfer_check(msg.topic, st);
    }

    // ---- leadership changes -------------------------------------------------------
    void adopt_epoch(const std::string& name, TopicState& st, std::uint64_t epoch,
                     const std::string& leader) {
        bool was_leader = st.leads(id());
        st.epoch = epoch;
        st.leader = leader;
        if (leader == id()) {
            become_leader(name, st);
            return;
        }
        if (was_leader) {
            // step down: kick parked fetches back to their consumers and
            // reconcile our log against the new leadership lineage
            for (const auto& p : st.parked) {
                rt_.send(*this, p.consumer,
                         MsgFetchResp{name, p.req_id, FetchStatus::NotLeader, 0, {}, 0});
            }
            st.parked.clear();
            st.pending_ack.clear();
            st.transfer_pending = false;
            if (!leader.empty()) {
                st.reconciling = true;
                MsgReconcile rec{name, id(), {}};
                for (const auto& e : st.log) rec.ids.push_back(e.rec.id());
                rt_.send(*this, leader, std::move(rec));
            }
        }
    }

    void become_leader(const std::string& name, TopicState& st) {
        rt_.log(*this, "BecameLeader", "topic=" + name + " epoch=" + std::to_string(st.epoch));
        st.elected_at = rt_.now();
        st.backlog_watch = true;
        st.reconciling = false;
        st.become_pending = false;
        st.acked_end.clear();
        st.caught_up_at.clear();
        st.isr = {id()};
        st.hw = st.end();  // this log is now the canonical lineage
        for (const auto& r : st.replicas) {
            if (r == id()) continue;
            st.caught_up_at[r] = rt_.now();  // grace before lag eviction
            rt_.send(*this, r, MsgReplicate{name, st.epoch, id(), st.end(), {}, st.hw});
        }
        std::vector<std::string> isr(st.isr.begin(), st.isr.end());
        rt_.send(*this, rt_.controller_id(), MsgIsrUpdate{name, st.epoch, std::move(isr)});
        serve_parked(name, st);
    }

    void on_metadata(MsgMetadata& msg) {
        for (const auto& e : msg.entries) {
            auto it = topics_.find(e.topic);
            if (it == topics_.end()) continue;
            if (e.epoch > it->second.epoch) {
                adopt_epoch(e.topic, it->second, e.epoch, e.leader);
            }
        }
    }

    // raft: catch up from the most complete live replica before serving
    void on_become_leader(MsgBecomeLeader& msg) {
        TopicState& st = topics_.at(msg.topic);
        st.become_pending = true;
        st.become_epoch = msg.epoch;
        st.sync_waiting.clear();
        st.sync_ends.clear();
        for (const auto& r : msg.live_replicas) {
            if (r == id()) continue;
            st.sync_waiting.insert(r);
            rt_.send(*this, r, MsgSyncQuery{msg.topic});
        }
        if (st.sync_waiting.empty()) {
            finish_sync(msg.topic, st);
            return;
        }
        rt_.timer(*this, 2 * kUsPerSec, [this, name = msg.topic] {
            TopicState& t = topics_.at(name);
            if (t.become_pending && !t.sync_waiting.empty()) {
                t.sync_waiting.clear();
                finish_sync(name, t);
            }
        });
    }

    void on_sync_info(const std::string& from, MsgSyncInfo& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (!st.become_pending) return;
        st.sync_waiting.erase(from);
        st.sync_ends[from] = msg.log_end;
        if (st.sync_waiting.empty()) finish_sync(msg.topic, st);
    }

    void finish_sync(const std::string& name, TopicState& st) {
        std::string best;
        std::int64_t best_end = st.end();
        for (const auto& [broker, end] : st.sync_ends) {
            if (end > best_end) {
                best = broker;
                best_end = end;
            }
        }
        if (!best.empty()) {
            rt_.send(*this, best, MsgSyncPull{name, st.end()});
            return;
        }
        rt_.send(*this, rt_.controller_id(), MsgElectionReady{name, st.become_epoch});
    }

    void on_sync_data(MsgSyncData& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (!st.become_pending) return;
        for (const auto& e : msg.entries) {
            if (e.offset != st.end()) continue;
            st.index[e.rec.id()] = st.end();
            st.log.push_back(e);
        }
        rt_.send(*this, rt_.controller_id(), MsgElectionReady{msg.topic, st.become_epoch});
    }

    void on_prepare_transfer(MsgPrepareTransfer& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (msg.epoch != st.epoch || !st.leads(id())) return;
        st.transfer_pending = true;
        st.transfer_to = msg.to;
        transfer_check(msg.topic, st);
    }

    void transfer_check(const std::string& name, TopicState& st) {
        if (!st.transfer_pending) return;
        auto acked = st.acked_end.count(st.transfer_to) ? st.acked_end.at(st.transfer_to) : 0;
        if (acked == st.end()) {
            st.transfer_pending = false;
            rt_.send(*this, rt_.controller_id(), MsgTransferReady{name, st.epoch});
        }
    }

    // ---- log reconciliation on rejoin ----------------------------------------------
    void on_reconcile(const std::string& from, MsgReconcile& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (!st.leads(id())) return;  // rejoiner will retry after fresh metadata
        std::int64_t prefix = 0;
        auto limit = std::min<std::int64_t>(static_cast<std::int64_t>(msg.ids.size()), st.end());
        while (prefix < limit &&
               msg.ids[static_cast<std::size_t>(prefix)] ==
                   st.log[static_cast<std::size_t>(prefix)].rec.id()) {
            ++prefix;
        }
        MsgReconcileResp resp{msg.topic, prefix, {}, st.hw};
        for (std::int64_t o = prefix; o < st.end(); ++o) {
            resp.entries.push_back(st.log[static_cast<std::size_t>(o)]);
        }
        rt_.send(*this, from, std::move(resp));
    }

    /// Merge-on-rejoin: drop the stale suffix, adopt the leader's, and report
    /// locally-acked records that did not survive.
    void on_reconcile_resp(MsgReconcileResp& msg) {
        TopicState& st = topics_.at(msg.topic);
        if (!st.reconciling) return;
        st.reconciling = false;
        std::int64_t truncated = 0;
        std::int64_t acked_lost = 0;
        while (st.end() > msg.prefix_len) {
            const RecordId rid = st.log.back().rec.id();
            rt_.metrics().on_truncated(rid);
            if (st.acked_by_me.count(rid)) ++acked_lost;
            st.index.erase(rid);
            st.log.pop_back();
            ++truncated;
        }
        for (const auto& e : msg.entries) {
            if (e.offset != st.end()) continue;
            st.index[e.rec.id()] = st.end();
            st.log.push_back(e);
        }
        st.hw = std::min(msg.hw, st.end());
        rt_.log(*this, "LogReconciled",
                "topic=" + msg.topic + " truncated=" + std::to_string(truncated) +
                    " acked_lost=" + std::to_string(acked_lost));
        rt_.send(*this, st.leader, MsgReplicateAck{msg.topic, st.epoch, id(), st.end()});
    }

    Runtime& rt_;
    BrokerSettings cfg_;
    std::map<std::string, TopicState> topics_;
    SimTime last_controller_contact_ = 0;
    bool isolated_ = false;
};

/// Centralized coordination service (the ZooKeeper/controller analog):
/// liveness tracking, leader election, preferred-replica re-election.
class Controller : public Component {
  public:
    struct TopicControl {
        std::string leader;  // broker component id, empty while unavailable
        std::uint64_t epoch = 1;
        std::string preferred;
        std::vector<std::string> replicas;
        std::set<std::string> isr;
        ConsistencyMode mode = ConsistencyMode::Zk;
        bool electing = false;
        std::string pending_winner;
        bool transfer_pending = false;
    };

    Controller(Runtime& rt, std::string node, BrokerSettings cfg)
        : Component(node + ".ctl", node), rt_(rt), cfg_(cfg) {}

    void init_topic(const TopicSpec& t, const std::vector<std::string>& replica_comps) {
        TopicControl tc;
        tc.leader = t.preferred_leader + ".broker";
        tc.preferred = tc.leader;
        tc.replicas = replica_comps;
        tc.isr.insert(replica_comps.begin(), replica_comps.end());
        tc.mode = t.mode;
        topics_.emplace(t.name, std::move(tc));
    }
    void init_liveness(const std::vector<std::string>& broker_comps) {
        for (const auto& b : broker_comps) {
            last_hb_[b] = 0;
            alive_[b] = true;
        }
    }

    const TopicControl& topic(const std::string& name) const { return topics_.at(name); }
    bool broker_alive(const std::string& comp) const { return alive_.at(comp); }

    void start() override {
        rt_.periodic(*this, kUsPerSec, [this] { liveness_check(); });
        rt_.periodic(*this, cfg_.preferred_check_us, [this] { preferred_check(); });
    }

    void handle(Message&& m) override {
        std::visit(
            [this, &m](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgHeartbeat>) on_heartbeat(m.from, body);
                else if constexpr (std::is_same_v<T, MsgIsrUpdate>) {
                    auto it = topics_.find(body.topic);
                    if (it != topics_.end() && body.epoch >= it->second.epoch) {
                        it->second.isr = std::set<std::string>(body.isr.begin(), body.isr.end());
                    }
                }
                else if constexpr (std::is_same_v<T, MsgElectionReady>) on_election_ready(body);
                else if constexpr (std::is_same_v<T, MsgTransferReady>) on_transfer_ready(m.from, body);
                else if constexpr (std::is_same_v<T, MsgMetadataReq>) {
                    rt_.send(*this, m.from, metadata());
                }
            },
            std::move(m.body));
    }

  private:
    MsgMetadata metadata() const {
        MsgMetadata md;
        for (const auto& [name, tc] : topics_) {
            md.entries.push_back({name, tc.leader, tc.epoch});
        }
        return md;
    }

    void push_metadata_all() {
        MsgMetadata md = metadata();
        for (const auto& comp : rt_.metadata_subscribers()) {
            rt_.send(*this, comp, md);
        }
    }

    void on_heartbeat(const std::string& from, MsgHeartbeat& msg) {
        last_hb_[msg.broker] = rt_.now();
        bool was_dead = !alive_[msg.broker];
        alive_[msg.broker] = true;
        rt_.send(*this, from, MsgHeartbeatAck{});
        if (was_dead) {
            rt_.log(*this, "BrokerRejoined", "broker=" + msg.broker);
            rt_.send(*this, msg.broker, metadata());
            for (auto& [name, tc] : topics_) {
                bool is_replica = std::find(tc.replicas.begin(), tc.replicas.end(), msg.broker) !=
                                  tc.replicas.end();
                if (tc.leader.empty() && is_replica && !tc.electing) start_election(name, tc);
            }
        }
    }

    void liveness_check() {
        for (auto& [broker, alive] : alive_) {
            if (!alive) continue;
            if (rt_.now() - last_hb_[broker] <= cfg_.session_timeout_us) continue;
            alive = false;
            for (auto& [name, tc] : topics_) {
                if (tc.leader == broker) {
                    rt_.log(*this, "LeaderDisconnectDetected",
                            "topic=" + name + " leader=" + broker);
                    if (!tc.electing) start_election(name, tc);
                } else if (tc.electing && tc.pending_winner == broker) {
                    finish_election(name, tc);  // winner died mid-sync: re-run
                }
            }
        }
    }

    void start_election(const std::string& name, TopicControl& tc) {
        tc.electing = true;
        tc.pending_winner.clear();
        rt_.timer(*this, cfg_.election_delay_us, [this, name] {
            auto it = topics_.find(name);
            if (it != topics_.end() && it->second.electing) finish_election(name, it->second);
        });
    }

    void finish_election(const std::string& name, TopicControl& tc) {
        std::vector<std::string> candidates;
        for (const auto& b : tc.isr) {
            if (b != tc.leader && alive_[b]) candidates.push_back(b);
        }
        if (candidates.empty()) {
            rt_.log(*this, "NoLiveReplica", "topic=" + name);
            tc.leader.clear();
            tc.electing = false;
            push_metadata_all();
            return;
        }
        std::string winner = *std::min_element(candidates.begin(), candidates.end());
        if (tc.mode == ConsistencyMode::Zk) {
            enact(name, tc, winner);
            return;
        }
        tc.pending_winner = winner;
        MsgBecomeLeader msg{name, tc.epoch + 1, {}};
        for (const auto& r : tc.replicas) {
            if (alive_[r]) msg.live_replicas.push_back(r);
        }
        rt_.send(*this, winner, std::move(msg));
    }

    void on_election_ready(MsgElectionReady& msg) {
        auto it = topics_.find(msg.topic);
        if (it == topics_.end() || !it->second.electing) return;
        if (msg.epoch != it->second.epoch + 1) return;
        enact(msg.topic, it->second, it->second.pending_winner);
    }

    void enact(const std::string& name, TopicControl& tc, const std::string& winner) {
        ++tc.epoch;
        tc.leader = winner;
        tc.electing = false;
        tc.pending_winner.clear();
        tc.isr.insert(winner);
        rt_.log(*this, "LeaderElected",
                "topic=" + name + " leader=" + winner + " epoch=" + std::to_string(tc.epoch));
        push_metadata_all();
    }

    void preferred_check() {
        for (auto& [name, tc] : topics_) {
            if (tc.electing || tc.transfer_pending) continue;
            if (tc.leader.empty() || tc.leader == tc.preferred) continue;
            if (!alive_[tc.preferred] || !tc.isr.count(tc.preferred)) continue;
            tc.transfer_pending = true;
            rt_.send(*this, tc.leader, MsgPrepareTransfer{name, tc.epoch, tc.preferred});
        }
    }

    void on_transfer_ready(const std::string& from, MsgTransferReady& msg) {
        auto it = topics_.find(msg.topic);
        if (it == topics_.end()) return;
        TopicControl& tc = it->second;
        if (!tc.transfer_pending || msg.epoch != tc.epoch || from != tc.leader) return;
        tc.transfer_pending = false;
        ++tc.epoch;
        tc.leader = tc.preferred;
        rt_.log(*this, "LeadershipRestored",
                "topic=" + msg.topic + " leader=" + tc.leader +
                    " epoch=" + std::to_string(tc.epoch));
        push_metadata_all();
    }

    Runtime& rt_;
    BrokerSettings cfg_;
    std::map<std::string, TopicControl> topics_;
    std::map<std::string, SimTime> last_hb_;
    std::map<std::string, bool> alive_;
};

}  // namespace streamforge
