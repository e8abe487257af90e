#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "streamforge/runtime.hpp"

namespace streamforge {

constexpr SimTime kWorkloadTickUs = 500 * kUsPerMs;
constexpr SimTime kRequestTimeoutUs = 2 * kUsPerSec;
constexpr SimTime kMetadataThrottleUs = 1 * kUsPerSec;

/// Producing side shared by producer stubs and operator outputs: buffering,
/// batched sends, retries with stable sequence numbers, produce timeouts.
class ProducePort {
  public:
    ProducePort(Runtime& rt, Component& owner, std::int64_t buffer_bytes,
                SimTime retry_interval_us, SimTime produce_timeout_us)
        : rt_(rt),
          owner_(owner),
          buffer_bytes_(buffer_bytes),
          retry_interval_us_(retry_interval_us),
          produce_timeout_us_(produce_timeout_us) {}

    void set_leader(const std::string& topic, const std::string& broker_comp) {
        believed_[topic] = broker_comp;
    }
    void set_on_space(std::function<void()> fn) { on_space_ = std::move(fn); }

    bool has_space(std::int64_t next_size) const {
        return unacked_bytes_ + next_size <= buffer_bytes_;
    }
    std::int64_t unacked_bytes() const { return unacked_bytes_; }
    std::int64_t pending_count() const { return static_cast<std::int64_t>(pending_.size()); }
    std::uint64_t emitted() const { return next_seq_; }

    /// Takes topic/payload/size/source from the caller, assigns identity and
    /// produce time, and queues the record for the end-of-event flush.
    RecordId emit(Record r) {
        r.producer = owner_.id();
        r.seq = next_seq_++;
        r.produce_us = rt_.now();
        if (r.source.producer.empty()) {
            r.source = r.id();
            r.source_produce_us = r.produce_us;
        }
        rt_.metrics().on_produced(r);
        unacked_bytes_ += r.size_bytes;
        Pending p;
        p.rec = r;
        p.emit_us = rt_.now();
        p.last_send_us = rt_.now();
        pending_.emplace(r.seq, std::move(p));
        staging_.push_back(std::move(r));
        if (!flush_scheduled_) {
            flush_scheduled_ = true;
            rt_.timer(owner_, 0, [this] { flush(); });
        }
        return {owner_.id(), next_seq_ - 1};
    }

    void on_produce_resp(const MsgProduceResp& msg) {
        for (const auto& [seq, offset] : msg.acked) {
            auto it = pending_.find(seq);
            if (it == pending_.end()) continue;
            unacked_bytes_ -= it->second.rec.size_bytes;
            rt_.metrics().on_acked({owner_.id(), seq}, rt_.now());
            pending_.erase(it);
            freed_ = true;
        }
        if (msg.status == ProduceStatus::NotLeader || msg.status == ProduceStatus::Rejected) {
            request_metadata();
        }
        if (freed_ && on_space_) {
            freed_ = false;
            on_space_();
        }
    }

    void on_metadata(const MsgMetadata& msg) {
        std::set<std::string> changed;
        for (const auto& e : msg.entries) {
            auto it = believed_.find(e.topic);
            if (it == believed_.end()) continue;
            if (it->second != e.leader) {
                it->second = e.leader;
                changed.insert(e.topic);
            }
        }
        if (!changed.empty()) resend_pending(&changed);
    }

    /// Periodic retry/timeout sweep; call from the owner's tick.
    void tick() {
        std::vector<std::uint64_t> expired;
        bool any_due = false;
        for (auto& [seq, p] : pending_) {
            if (rt_.now() - p.emit_us >= produce_timeout_us_) {
                expired.push_back(seq);
            } else if (rt_.now() - p.last_send_us >= retry_interval_us_) {
                any_due = true;
            }
        }
        for (std::uint64_t seq : expired) {
            auto it = pending_.find(seq);
            unacked_bytes_ -= it->second.rec.size_bytes;
            rt_.metrics().on_failed({owner_.id(), seq});
            rt_.log(owner_, "ProduceTimeout",
                    "record=" + owner_.id() + "#" + std::to_string(seq) +
                        " topic=" + it->second.rec.topic);
            pending_.erase(it);
            freed_ = true;
        }
        if (any_due) {
            resend_pending(nullptr);
            request_metadata();
        }
        if (freed_ && on_space_) {
            freed_ = false;
            on_space_();
        }
    }

    void on_crash() {
        // volatile send state dies with the process; sequence counter is
        // durable so identities never collide after recovery
        for (const auto& [seq, p] : pending_) {
            rt_.metrics().on_failed({owner_.id(), seq});
        }
        pending_.clear();
        staging_.clear();
        unacked_bytes_ = 0;
        flush_scheduled_ = false;
    }

  private:
    struct Pending {
        Record rec;
        SimTime emit_us = 0;
        SimTime last_send_us = 0;
    };

    void flush() {
        flush_scheduled_ = false;
        std::map<std::string, std::vector<Record>> by_topic;
        for (auto& r : staging_) by_topic[r.topic].push_back(std::move(r));
        staging_.clear();
        for (auto& [topic, records] : by_topic) {
            const std::string& leader = believed_[topic];
            if (leader.empty()) {
                request_metadata();
                continue;  // retry tick re-sends once a leader is known
            }
            rt_.send(owner_, leader, MsgProduce{topic, std::move(records)});
        }
    }

    void resend_pending(const std::set<std::string>* only_topics) {
        std::map<std::string, std::vector<Record>> by_topic;
        for (auto& [seq, p] : pending_) {
            if (only_topics && !only_topics->count(p.rec.topic)) continue;
            if (!only_topics && rt_.now() - p.last_send_us < retry_interval_us_) continue;
            p.last_send_us = rt_.now();
            by_topic[p.rec.topic].push_back(p.rec);
        }
        for (auto& [topic, records] : by_topic) {
            const std::string& leader = believed_[topic];
            if (leader.empty()) continue;
            rt_.send(owner_, leader, MsgProduce{topic, std::move(records)});
        }
    }

    void request_metadata() {
        if (rt_.now() - last_meta_req_ < kMetadataThrottleUs) return;
        last_meta_req_ = rt_.now();
        rt_.send(owner_, rt_.controller_id(), MsgMetadataReq{});
    }

    Runtime& rt_;
    Component& owner_;
    std::int64_t buffer_bytes_;
    SimTime retry_interval_us_;
    SimTime produce_timeout_us_;
    std::map<std::string, std::string> believed_;
    std::map<std::uint64_t, Pending> pending_;
    std::vector<Record> staging_;
    std::uint64_t next_seq_ = 0;
    std::int64_t unacked_bytes_ = 0;
    bool flush_scheduled_ = false;
    bool freed_ = false;
    SimTime last_meta_req_ = -kMetadataThrottleUs;
    std::function<void()> on_space_;
};

/// Consuming side shared by consumer stubs and operator inputs: one
/// long-polled fetch per topic, re-issued on response, timeout, or metadata
/// change; offsets reset on OffsetOutOfRange.
class FetchLoop {
  public:
    using DeliverFn = std::function<void(const Record&, std::int64_t offset)>;

    FetchLoop(Runtime& rt, Component& owner) : rt_(rt), owner_(owner) {}

    void subscribe(const std::string& topic, const std::string& leader_comp) {
        TopicFetch tf;
        tf.believed = leader_comp;
        topics_.emplace(topic, std::move(tf));
    }
    void set_deliver(DeliverFn fn) { deliver_ = std::move(fn); }
    std::int64_t next_offset(const std::string& topic) const {
        return topics_.at(topic).next_offset;
    }

    void start() {
        for (auto& [name, tf] : topics_) issue(name, tf);
    }

    void on_metadata(const MsgMetadata& msg) {
        for (const auto& e : msg.entries) {
            auto it = topics_.find(e.topic);
            if (it == topics_.end()) continue;
            if (it->second.believed != e.leader) {
                it->second.believed = e.leader;
                if (!e.leader.empty()) issue(e.topic, it->second);
            }
        }
    }

    void on_fetch_resp(const MsgFetchResp& msg) {
        auto it = topics_.find(msg.topic);
        if (it == topics_.end()) return;
        TopicFetch& tf = it->second;
        if (msg.req_id != tf.outstanding_req) return;  // stale response
        tf.outstanding_req = 0;
        switch (msg.status) {
            case FetchStatus::Ok:
                for (const auto& e : msg.entries) {
                    deliver_(e.rec, e.offset);
                    tf.next_offset = e.offset + 1;
                }
                issue(msg.topic, tf);
                break;
            case FetchStatus::OutOfRange:
                rt_.metrics().on_offset_reset(owner_.id(), msg.topic);
                rt_.log(owner_, "OffsetReset",
                        "topic=" + msg.topic + " from=" + std::to_string(tf.next_offset) +
                            " hw=" + std::to_string(msg.hw));
                tf.next_offset = msg.hw;
                issue(msg.topic, tf);
                break;
            case FetchStatus::NotLeader:
                request_metadata();
                break;  // reissued by tick or metadata change
        }
    }

    void tick() {
        for (auto& [name, tf] : topics_) {
            if (rt_.now() - tf.last_issue_us >= kRequestTimeoutUs) {
                if (tf.believed.empty()) {
                    request_metadata();
                } else {
                    issue(name, tf);
                }
            }
        }
    }

    void on_recover() { start(); }

  private:
    struct TopicFetch {
        std::string believed;
        std::int64_t next_offset = 0;
        std::uint64_t outstanding_req = 0;
        std::uint64_t req_counter = 0;
        SimTime last_issue_us = -kRequestTimeoutUs;
    };

    void issue(const std::string& topic, TopicFetch& tf) {
        if (tf.believed.empty()) return;
        tf.outstanding_req = ++tf.req_counter;
        tf.last_issue_us = rt_.now();
        rt_.send(owner_, tf.believed, MsgFetch{topic, tf.next_offset, tf.outstanding_req});
    }

    void request_metadata() {
        if (rt_.now() - last_meta_req_ < kMetadataThrottleUs) return;
        last_meta_req_ = rt_.now();
        rt_.send(owner_, rt_.controller_id(), MsgMetadataReq{});
    }

    Runtime& rt_;
    Component& owner_;
    std::map<std::string, TopicFetch> topics_;
    DeliverFn deliver_;
    SimTime last_meta_req_ = -kMetadataThrottleUs;
};

/// Data source stub: paced synthetic blobs, one record per file line, or one
/// record per file of a directory.
class ProducerStub : public Component {
  public:
    ProducerStub(Runtime& rt, std::string node, ProducerSettings cfg)
        : Component(node + ".prod", node),
          rt_(rt),
          cfg_(cfg),
          rng_(rt.make_rng(node + ".prod")),
          port_(rt, *this, cfg.buffer_bytes, cfg.retry_interval_us, cfg.produce_timeout_us) {
        if (cfg_.mode == ProducerMode::LineOfFile) {
            std::ifstream in(cfg_.path);
            if (!in) throw IoError("producer cannot open " + cfg_.path);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) corpus_.push_back(line);
            }
        } else if (cfg_.mode == ProducerMode::FileOfDirectory) {
            std::vector<std::filesystem::path> files;
            for (const auto& e : std::filesystem::directory_iterator(cfg_.path)) {
                if (e.is_regular_file()) files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                std::ifstream in(f);
                std::ostringstream buf;
                buf << in.rdbuf();
                corpus_.push_back(buf.str());
            }
        }
    }

    ProducePort& port() { return port_; }
    bool stalled() const { return stalled_; }
    std::uint64_t emitted() const { return port_.emitted(); }

    void start() override {
        port_.set_on_space([this] { on_space(); });
        rt_.periodic(*this, kWorkloadTickUs, [this] { port_.tick(); });
        rt_.timer(*this, 0, [this] { emit_next(); });
    }

    void handle(Message&& m) override {
        std::visit(
            [this](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgProduceResp>) port_.on_produce_resp(body);
                else if constexpr (std::is_same_v<T, MsgMetadata>) port_.on_metadata(body);
            },
            std::move(m.body));
    }

  protected:
    void on_crash() override {
        port_.on_crash();
        stalled_ = false;
        next_.reset();
    }
    void on_recover() override {
        port_.set_on_space([this] { on_space(); });
        rt_.periodic(*this, kWorkloadTickUs, [this] { port_.tick(); });
        rt_.timer(*this, 0, [this] { emit_next(); });
    }

  private:
    SimTime interval_for(std::int64_t size_bytes) const {
        return static_cast<SimTime>(
            std::llround(static_cast<double>(size_bytes) * 8000.0 / cfg_.rate_kbps));
    }

    std::optional<Record> make_record() {
        Record r;
        r.topic = draw_topic();
        if (cfg_.mode == ProducerMode::SyntheticRate) {
            r.size_bytes = cfg_.record_size_bytes;
        } else {
            if (corpus_index_ >= corpus_.size()) return std::nullopt;
            r.payload = corpus_[corpus_index_++];
            r.size_bytes = static_cast<std::int64_t>(std::max<std::size_t>(1, r.payload.size()));
        }
        return r;
    }

    std::string draw_topic() {
        double total = 0;
        for (const auto& [name, w] : cfg_.topic_weights) total += w;
        double x = rng_.next_double() * total;
        for (const auto& [name, w] : cfg_.topic_weights) {
            x -= w;
            if (x < 0) return name;
        }
        return cfg_.topic_weights.rbegin()->first;
    }

    void emit_next() {
        if (!next_) next_ = make_record();
        if (!next_) return;  // corpus drained
        if (!port_.has_space(next_->size_bytes)) {
            if (!stalled_) {
                stalled_ = true;
                rt_.log(*this, "BufferStall",
                        "emitted=" + std::to_string(port_.emitted()) +
                            " unacked_bytes=" + std::to_string(port_.unacked_bytes()));
            }
            return;  // resumes via on_space
        }
        Record r = std::move(*next_);
        next_.reset();
        std::int64_t size = r.size_bytes;
        port_.emit(std::move(r));
        rt_.timer(*this, interval_for(size), [this] { emit_next(); });
    }

    void on_space() {
        if (!stalled_ || !next_) return;
        if (!port_.has_space(next_->size_bytes)) return;
        stalled_ = false;
        rt_.log(*this, "BufferResume", "emitted=" + std::to_string(port_.emitted()));
        emit_next();
    }

    Runtime& rt_;
    ProducerSettings cfg_;
    RandomSource rng_;
    ProducePort port_;
    std::vector<std::string> corpus_;
    std::size_t corpus_index_ = 0;
    std::optional<Record> next_;
    bool stalled_ = false;
};

/// Data sink stub: subscribes, records latency samples and delivery marks.
class ConsumerStub : public Component {
  public:
    ConsumerStub(Runtime& rt, std::string node, ConsumerSettings cfg)
        : Component(node + ".cons", node), rt_(rt), cfg_(std::move(cfg)), fetch_(rt, *this) {}

    FetchLoop& fetch() { return fetch_; }

    void start() override {
        fetch_.set_deliver([this](const Record& r, std::int64_t offset) {
            if (rt_.metrics().on_delivered(id(), r, offset, rt_.now())) {
                rt_.metrics().on_sink_arrival(id(), r.source, r.source_produce_us, rt_.now());
            }
        });
        fetch_.start();
        rt_.periodic(*this, kWorkloadTickUs, [this] { fetch_.tick(); });
    }

    void handle(Message&& m) override {
        std::visit(
            [this](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgFetchResp>) fetch_.on_fetch_resp(body);
                else if constexpr (std::is_same_v<T, MsgMetadata>) fetch_.on_metadata(body);
            },
            std::move(m.body));
    }

  protected:
    void on_recover() override {
        fetch_.on_recover();
        rt_.periodic(*this, kWorkloadTickUs, [this] { fetch_.tick(); });
    }

  private:
    Runtime& rt_;
    ConsumerSettings cfg_;
    FetchLoop fetch_;
};

/// Stream-processing job: fetches its input topic, applies the operator with
/// a modeled per-record service time (scaled by the host's cpuPercentage),
/// and produces downstream, to a local sink, or to a key-value store.
class OperatorJob : public Component {
  public:
    OperatorJob(Runtime& rt, std::string node, JobSettings cfg, double cpu_percentage)
        : Component(node + ".spe", node),
          rt_(rt),
          cfg_(cfg),
          fetch_(rt, *this),
          port_(rt, *this, kDefaultBufferBytes, kDefaultRetryIntervalUs, kDefaultProduceTimeoutUs) {
        scaled_service_us_ = static_cast<SimTime>(
            std::ceil(static_cast<double>(cfg_.service_time_us) / cpu_percentage - 1e-12));
    }

    FetchLoop& fetch() { return fetch_; }
    ProducePort& port() { return port_; }
    SimTime total_busy_us() const { return total_busy_us_; }
    std::int64_t records_processed() const { return processed_; }
    std::int64_t malformed() const { return malformed_; }
    SimTime scaled_service_us() const { return scaled_service_us_; }
    const std::map<std::string, std::int64_t>& counts() const { return counts_; }

    void start() override {
        fetch_.set_deliver([this](const Record& r, std::int64_t offset) {
            if (!rt_.metrics().on_delivered(id(), r, offset, rt_.now())) return;  // dedup
            enqueue(r);
        });
        fetch_.start();
        rt_.periodic(*this, kWorkloadTickUs, [this] {
            fetch_.tick();
            port_.tick();
        });
    }

    void handle(Message&& m) override {
        std::visit(
            [this](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgFetchResp>) fetch_.on_fetch_resp(body);
                else if constexpr (std::is_same_v<T, MsgProduceResp>) port_.on_produce_resp(body);
                else if constexpr (std::is_same_v<T, MsgMetadata>) {
                    fetch_.on_metadata(body);
                    port_.on_metadata(body);
                }
                else if constexpr (std::is_same_v<T, MsgKvWriteAck>) { /* fire and forget */ }
            },
            std::move(m.body));
    }

    void dump_state() {
        for (const auto& [key, count] : counts_) {
            rt_.metrics().on_operator_state(id(), key, std::to_string(count));
        }
        rt_.metrics().on_operator_state(id(), "_records_processed", std::to_string(processed_));
        rt_.metrics().on_operator_state(id(), "_malformed", std::to_string(malformed_));
    }

  protected:
    void on_crash() override {
        // volatile operator state is lost; the input offset survives like a
        // committed consumer position
        counts_.clear();
        windows_.clear();
        join_windows_.clear();
        busy_until_ = 0;
        port_.on_crash();
    }
    void on_recover() override {
        fetch_.on_recover();
        rt_.periodic(*this, kWorkloadTickUs, [this] {
            fetch_.tick();
            port_.tick();
        });
    }

  private:
    struct WindowAgg {
        double sum = 0;
        std::int64_t count = 0;
        RecordId last_source;
        SimTime last_source_produce_us = 0;
    };
    struct JoinRow {
        std::string group;
        double value = 0;
    };
    struct JoinAgg {
        std::vector<JoinRow> a, b;
        RecordId last_source;
        SimTime last_source_produce_us = 0;
    };

    void enqueue(const Record& r) {
        busy_until_ = std::max(busy_until_, rt_.now()) + scaled_service_us_;
        total_busy_us_ += scaled_service_us_;
        SimTime window_start = 0;
        if (cfg_.window_us > 0) {
            std::int64_t widx = rt_.now() / cfg_.window_us;
            window_start = widx * cfg_.window_us;
            if (!scheduled_windows_.count(widx)) {
                scheduled_windows_.insert(widx);
                SimTime close_at = (widx + 1) * cfg_.window_us;
                rt_.timer(*this, close_at - rt_.now(), [this, widx] { close_window(widx); });
            }
        }
        Record copy = r;
        rt_.timer(*this, busy_until_ - rt_.now(), [this, copy, window_start] {
            process(copy, window_start);
        });
    }

    void process(const Record& r, SimTime window_start) {
        ++processed_;
        std::vector<Record> outputs;
        switch (cfg_.kind) {
            case OperatorKind::SplitWords: {
                std::istringstream in(r.payload);
                std::string token;
                while (in >> token) {
                    outputs.push_back(derive(r, token));
                }
                break;
            }
            case OperatorKind::CountByKey: {
                std::string key = r.payload.substr(0, r.payload.find(','));
                if (key.empty()) break;  // empty payload: no output, no error
                std::int64_t c = ++counts_[key];
                outputs.push_back(derive(r, key + "," + std::to_string(c)));
                break;
            }
            case OperatorKind::WindowedAverage: {
                auto fields = split_list(r.payload);
                double value = 0;
                if (fields.size() != 2 || !parse_double(fields.size() == 2 ? fields[1] : "", value)) {
                    malformed_record(r);
                    break;
                }
                auto& agg = windows_[window_start / std::max<SimTime>(1, cfg_.window_us)][fields[0]];
                agg.sum += value;
                agg.count += 1;
                agg.last_source = r.source;
                agg.last_source_produce_us = r.source_produce_us;
                break;
            }
            case OperatorKind::JoinGroupWindow: {
                auto fields = split_list(r.payload);
                double value = 0;
                if (fields.size() != 4 || !parse_double(fields[3], value)) {
                    malformed_record(r);
                    break;
                }
                auto& agg =
                    join_windows_[window_start / std::max<SimTime>(1, cfg_.window_us)][fields[1]];
                JoinRow row{fields[2], value};
                if (fields[0] == "a") agg.a.push_back(row);
                else agg.b.push_back(row);
                agg.last_source = r.source;
                agg.last_source_produce_us = r.source_produce_us;
                break;
            }
            case OperatorKind::PassthroughCost: {
                outputs.push_back(derive(r, r.payload.empty() ? std::string() : r.payload,
                                         r.size_bytes));
                break;
            }
        }
        ship(outputs);
    }

    void close_window(std::int64_t widx) {
        // wait until every record that arrived inside the window left the
        // service queue, so the emitted aggregate is complete
        if (busy_until_ > rt_.now()) {
            rt_.timer(*this, busy_until_ - rt_.now(), [this, widx] { close_window(widx); });
            return;
        }
        std::vector<Record> outputs;
        if (cfg_.kind == OperatorKind::WindowedAverage) {
            auto it = windows_.find(widx);
            if (it != windows_.end()) {
                for (const auto& [key, agg] : it->second) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6g",
                                  agg.sum / static_cast<double>(agg.count));
                    Record out;
                    out.payload = key + "," + buf;
                    out.size_bytes = static_cast<std::int64_t>(out.payload.size());
                    out.source = agg.last_source;
                    out.source_produce_us = agg.last_source_produce_us;
                    outputs.push_back(std::move(out));
                }
                windows_.erase(it);
            }
        } else if (cfg_.kind == OperatorKind::JoinGroupWindow) {
            auto it = join_windows_.find(widx);
            if (it != join_windows_.end()) {
                std::map<std::string, std::pair<double, std::int64_t>> groups;
                RecordId src;
                SimTime src_produce = 0;
                for (const auto& [join_key, agg] : it->second) {
                    if (agg.a.empty() || agg.b.empty()) continue;
                    for (const auto& a : agg.a) {
                        for (const auto& b : agg.b) {
                            auto& g = groups[a.group];
                            g.first += b.value;
                            g.second += 1;
                        }
                    }
                    src = agg.last_source;
                    src_produce = agg.last_source_produce_us;
                }
                for (const auto& [group, sumcount] : groups) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6g",
                                  sumcount.first / static_cast<double>(sumcount.second));
                    Record out;
                    out.payload = group + "," + buf + "," + std::to_string(sumcount.second);
                    out.size_bytes = static_cast<std::int64_t>(out.payload.size());
                    out.source = src;
                    out.source_produce_us = src_produce;
                    outputs.push_back(std::move(out));
                }
                join_windows_.erase(it);
            }
        }
        ship(outputs);
    }

    Record derive(const Record& in, std::string payload, std::int64_t size = -1) {
        Record out;
        out.payload = std::move(payload);
        out.size_bytes = size >= 0 ? size
                                   : static_cast<std::int64_t>(
                                         std::max<std::size_t>(1, out.payload.size()));
        out.source = in.source;
        out.source_produce_us = in.source_produce_us;
        return out;
    }

    void ship(std::vector<Record>& outputs) {
        for (Record& out : outputs) {
            if (cfg_.out_topic == "sink") {
                rt_.metrics().on_sink_arrival(id(), out.source, out.source_produce_us, rt_.now());
                continue;
            }
            if (cfg_.out_topic.rfind("store:", 0) == 0) {
                std::string store_comp = cfg_.out_topic.substr(6) + ".store";
                std::string key = out.payload.substr(0, out.payload.find(','));
                MsgKvWrite w{key, out.payload, out.source, out.size_bytes,
                             out.source_produce_us};
                rt_.send(*this, store_comp, std::move(w));
                continue;
            }
            out.topic = cfg_.out_topic;
            port_.emit(std::move(out));
        }
    }

    void malformed_record(const Record& r) {
        ++malformed_;
        rt_.log(*this, "MalformedRecord", "topic=" + r.topic + " record=" + r.id().str());
    }

    static bool parse_double(const std::string& s, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(s, &pos);
            return pos == s.size();
        } catch (const std::exception&) {
            return false;
        }
    }

    Runtime& rt_;
    JobSettings cfg_;
    FetchLoop fetch_;
    ProducePort port_;
    SimTime scaled_service_us_ = 0;
    SimTime busy_until_ = 0;
    SimTime total_busy_us_ = 0;
    std::int64_t processed_ = 0;
    std::int64_t malformed_ = 0;
    std::map<std::string, std::int64_t> counts_;
    std::map<std::int64_t, std::map<std::string, WindowAgg>> windows_;
    std::map<std::int64_t, std::map<std::string, JoinAgg>> join_windows_;
    std::set<std::int64_t> scheduled_windows_;
};

/// Serialized key-value store stub with configurable read/write latency;
/// serial execution gives read-your-writes within a client.
class KVStoreStub : public Component {
  public:
    KVStoreStub(Runtime& rt, std::string node, StoreSettings cfg)
        : Component(node + ".store", node), rt_(rt), cfg_(cfg) {}

    const std::map<std::string, std::string>& contents() const { return map_; }

    void handle(Message&& m) override {
        std::visit(
            [this, &m](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, MsgKvWrite>) {
                    busy_until_ = std::max(busy_until_, rt_.now()) + cfg_.write_latency_us;
                    MsgKvWrite w = body;
                    std::string from = m.from;
                    rt_.timer(*this, busy_until_ - rt_.now(), [this, w, from] {
                        map_[w.key] = w.value;
                        rt_.metrics().on_sink_arrival(id(), w.source, w.source_produce_us,
                                                      rt_.now());
                        rt_.send(*this, from, MsgKvWriteAck{w.key});
                    });
                } else if constexpr (std::is_same_v<T, MsgKvRead>) {
                    busy_until_ = std::max(busy_until_, rt_.now()) + cfg_.read_latency_us;
                    MsgKvRead r = body;
                    std::string from = m.from;
                    rt_.timer(*this, busy_until_ - rt_.now(), [this, r, from] {
                        std::optional<std::string> v;
                        auto it = map_.find(r.key);
                        if (it != map_.end()) v = it->second;
                        rt_.send(*this, from, MsgKvReadResp{r.key, v, r.req_id});
                    });
                }
            },
            std::move(m.body));
    }

    void dump_state() {
        for (const auto& [k, v] : map_) rt_.metrics().on_operator_state(id(), k, v);
    }

  protected:
    void on_crash() override {
        map_.clear();  // in-memory store stub
        busy_until_ = 0;
    }

  private:
    Runtime& rt_;
    StoreSettings cfg_;
    std::map<std::string, std::string> map_;
    SimTime busy_until_ = 0;
};

}  // namespace streamforge
