#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "streamforge/errors.hpp"
#include "streamforge/record.hpp"
#include "streamforge/sim_time.hpp"

namespace streamforge {

struct EventLine {
    SimTime time = 0;
    std::string component;
    std::string kind;
    std::string detail;
};

struct DeliveryRow {
    std::string topic, producer, consumer;
    std::uint64_t seq = 0;
    SimTime produce_us = 0;
    SimTime deliver_us = 0;
    std::int64_t offset = 0;
    std::int64_t size_bytes = 0;
};

struct PortSample {
    SimTime time = 0;
    std::int64_t tx_bytes = 0;  // cumulative
    std::int64_t rx_bytes = 0;  // cumulative
};

struct ProducedInfo {
    std::string topic;
    std::int64_t size_bytes = 0;
    SimTime produce_us = 0;
    SimTime ack_us = -1;            // first ack seen by the producer
    SimTime commit_us = -1;         // last append at a leader
    std::uint64_t commit_epoch = 0; // epoch of that leader
    bool failed = false;            // produce timeout
    bool truncated = false;         // removed from some log at least once
};

struct E2eSample {
    std::string sink;
    RecordId source;
    SimTime produce_us = 0;
    SimTime complete_us = 0;  // last derived output seen at the sink
};

/// Terminal classification of a produced record; the four states partition
/// the produced set, so `produced = delivered + lost + in_flight` holds by
/// accounting (and is independently re-checked from the exported CSVs in the
/// test suite).
enum class RecordOutcome { DeliveredToAll, Lost, InFlight };

struct TopicSummary {
    std::int64_t produced = 0;
    std::int64_t acked = 0;
    std::int64_t delivered_unique = 0;  // delivered to every subscriber
    std::int64_t lost = 0;
    std::int64_t acked_lost = 0;  // acked records absent from the final log
    std::int64_t duplicates = 0;
    std::int64_t in_flight = 0;
    std::int64_t delivery_count = 0;
    double latency_mean_us = 0.0;
    std::int64_t latency_p50_us = 0;
    std::int64_t latency_p99_us = 0;
};

struct SinkSummary {
    std::int64_t samples = 0;
    double e2e_mean_us = 0.0;
    std::int64_t e2e_p50_us = 0;
    std::int64_t e2e_p99_us = 0;
};

struct PortSummary {
    std::string node;
    int port = 0;
    double mean_rx_bps = 0.0;
    double mean_tx_bps = 0.0;
    double peak_rx_bps = 0.0;
    double peak_tx_bps = 0.0;
};

struct Summary {
    std::map<std::string, TopicSummary> topics;
    std::map<std::string, SinkSummary> sinks;
    std::vector<PortSummary> ports;
    std::int64_t offset_violations = 0;
};

namespace detail {

inline std::int64_t percentile(std::vector<SimTime>& sorted, double p) {
    if (sorted.empty()) return 0;
    std::size_t n = sorted.size();
    auto idx = static_cast<std::size_t>(std::max<double>(1.0, std::ceil(p / 100.0 * n))) - 1;
    if (idx >= n) idx = n - 1;
    return sorted[idx];
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace detail

/// Append-only observation store written by the event loop and exported
/// after the run finishes.
class MetricsStore {
  public:
    // ---- run wiring -------------------------------------------------------
    void set_subscribers(const std::string& topic, std::set<std::string> consumers) {
        subscribers_[topic] = std::move(consumers);
        topics_.insert(topic);
    }
    const std::set<std::string>& subscribers(const std::string& topic) const {
        static const std::set<std::string> empty;
        auto it = subscribers_.find(topic);
        return it == subscribers_.end() ? empty : it->second;
    }

    // ---- event log --------------------------------------------------------
    void log_event(SimTime t, const std::string& component, const std::string& kind,
                   const std::string& detail) {
        if (!events_.empty() && t < events_.back().time) {
            throw Error("event log time went backwards");
        }
        events_.push_back({t, component, kind, detail});
    }
    const std::vector<EventLine>& events() const { return events_; }

    std::optional<SimTime> first_event(const std::string& kind,
                                       const std::string& detail_substr = "") const {
        for (const auto& e : events_) {
            if (e.kind == kind &&
                (detail_substr.empty() || e.detail.find(detail_substr) != std::string::npos)) {
                return e.time;
            }
        }
        return std::nullopt;
    }

    // ---- production lifecycle ---------------------------------------------
    void on_produced(const Record& r) {
        ProducedInfo info;
        info.topic = r.topic;
        info.size_bytes = r.size_bytes;
        info.produce_us = r.produce_us;
        produced_.emplace(r.id(), info);
        topics_.insert(r.topic);
    }
    void on_acked(const RecordId& id, SimTime t) {
        auto it = produced_.find(id);
        if (it != produced_.end() && it->second.ack_us < 0) it->second.ack_us = t;
    }
    void on_committed(const RecordId& id, std::uint64_t epoch, SimTime t) {
        auto it = produced_.find(id);
        if (it != produced_.end()) {
            it->second.commit_us = t;
            it->second.commit_epoch = epoch;
        }
    }
    void on_failed(const RecordId& id) {
        auto it = produced_.find(id);
        if (it != produced_.end()) it->second.failed = true;
    }
    void on_truncated(const RecordId& id) {
        auto it = produced_.find(id);
        if (it != produced_.end()) it->second.truncated = true;
    }
    const std::map<RecordId, ProducedInfo>& produced() const { return produced_; }

    // ---- consumption -------------------------------------------------------
    /// Returns false for a duplicate delivery (already marked for this
    /// consumer); duplicates are counted, not re-marked.
    bool on_delivered(const std::string& consumer, const Record& r, std::int64_t offset,
                      SimTime t) {
        if (t < r.produce_us) throw Error("delivery before production");
        auto key = std::make_pair(r.id(), consumer);
        if (!delivered_.insert(key).second) {
            ++duplicates_[r.topic];
            return false;
        }
        rows_.push_back({r.topic, r.producer, consumer, r.seq, r.produce_us, t, offset,
                         r.size_bytes});
        auto& mono = offsets_[{consumer, r.topic}];
        if (mono.seen && offset <= mono.last && !mono.reset_pending) ++offset_violations_;
        mono.seen = true;
        mono.last = offset;
        mono.reset_pending = false;
        return true;
    }
    void on_offset_reset(const std::string& consumer, const std::string& topic) {
        offsets_[{consumer, topic}].reset_pending = true;
    }
    bool was_delivered(const RecordId& id, const std::string& consumer) const {
        return delivered_.count({id, consumer}) > 0;
    }
    const std::vector<DeliveryRow>& deliveries() const { return rows_; }
    std::int64_t offset_violations() const { return offset_violations_; }

    // ---- pipeline end-to-end ------------------------------------------------
    void on_sink_arrival(const std::string& sink, const RecordId& source, SimTime produce_us,
                         SimTime t) {
        auto& slot = e2e_[{sink, source}];
        slot.sink = sink;
        slot.source = source;
        slot.produce_us = produce_us;
        slot.complete_us = std::max(slot.complete_us, t);
    }

    // ---- port counters ------------------------------------------------------
    void register_port(const std::string& node, int port) { ports_[{node, port}]; }
    void sample_port(const std::string& node, int port, SimTime t, std::int64_t tx,
                     std::int64_t rx) {
        ports_[{node, port}].push_back({t, tx, rx});
    }
    const std::vector<PortSample>& port_series(const std::string& node, int port) const {
        auto it = ports_.find({node, port});
        if (it == ports_.end()) {
            throw UnknownPortError(node + ":" + std::to_string(port));
        }
        return it->second;
    }
    const std::map<std::pair<std::string, int>, std::vector<PortSample>>& all_ports() const {
        return ports_;
    }

    // ---- end-of-run state ----------------------------------------------------
    void set_final_log(const std::string& topic, std::set<RecordId> ids) {
        final_logs_[topic] = std::move(ids);
    }
    bool in_final_log(const RecordId& id, const std::string& topic) const {
        auto it = final_logs_.find(topic);
        return it != final_logs_.end() && it->second.count(id) > 0;
    }
    void on_operator_state(const std::string& job, const std::string& key,
                           const std::string& value) {
        operator_state_.push_back({job, key, value});
    }

    RecordOutcome outcome(const RecordId& id, const ProducedInfo& info) const {
        bool acked = info.ack_us >= 0;
        bool in_final = in_final_log(id, info.topic);
        if (acked && !in_final) return RecordOutcome::Lost;
        const auto& subs = subscribers(info.topic);
        bool full = !subs.empty();
        for (const auto& c : subs) {
            if (!delivered_.count({id, c})) {
                full = false;
                break;
            }
        }
        if (full) return RecordOutcome::DeliveredToAll;
        if (info.failed && !in_final) return RecordOutcome::Lost;
        return RecordOutcome::InFlight;
    }

    // ---- summaries ------------------------------------------------------------
    Summary summarize(SimTime duration_us) const {
        Summary s;
        std::map<std::string, std::vector<SimTime>> lat;
        for (const auto& row : rows_) {
            auto& t = s.topics[row.topic];
            ++t.delivery_count;
            lat[row.topic].push_back(row.deliver_us - row.produce_us);
        }
        for (const auto& [id, info] : produced_) {
            auto& t = s.topics[info.topic];
            ++t.produced;
            if (info.ack_us >= 0) ++t.acked;
            switch (outcome(id, info)) {
                case RecordOutcome::DeliveredToAll: ++t.delivered_unique; break;
                case RecordOutcome::Lost: ++t.lost; break;
                case RecordOutcome::InFlight: ++t.in_flight; break;
            }
            if (info.ack_us >= 0 && !in_final_log(id, info.topic)) ++t.acked_lost;
        }
        for (const auto& [topic, d] : duplicates_) s.topics[topic].duplicates = d;
        for (auto& [topic, t] : s.topics) {
            auto& v = lat[topic];
            if (!v.empty()) {
                double sum = 0;
                for (SimTime x : v) sum += static_cast<double>(x);
                t.latency_mean_us = sum / static_cast<double>(v.size());
                std::sort(v.begin(), v.end());
                t.latency_p50_us = detail::percentile(v, 50);
                t.latency_p99_us = detail::percentile(v, 99);
            }
        }
        std::map<std::string, std::vector<SimTime>> e2e;
        for (const auto& [key, sample] : e2e_) {
            e2e[sample.sink].push_back(sample.complete_us - sample.produce_us);
        }
        for (auto& [sink, v] : e2e) {
            SinkSummary ss;
            ss.samples = static_cast<std::int64_t>(v.size());
            double sum = 0;
            for (SimTime x : v) sum += static_cast<double>(x);
            ss.e2e_mean_us = sum / static_cast<double>(v.size());
            std::sort(v.begin(), v.end());
            ss.e2e_p50_us = detail::percentile(v, 50);
            ss.e2e_p99_us = detail::percentile(v, 99);
            s.sinks[sink] = ss;
        }
        for (const auto& [key, samples] : ports_) {
            PortSummary ps;
            ps.node = key.first;
            ps.port = key.second;
            if (samples.size() >= 2) {
                const auto& first = samples.front();
                const auto& last = samples.back();
                double span_s = seconds_from_us(last.time - first.time);
                if (span_s > 0) {
                    ps.mean_tx_bps = (last.tx_bytes - first.tx_bytes) * 8.0 / span_s;
                    ps.mean_rx_bps = (last.rx_bytes - first.rx_bytes) * 8.0 / span_s;
                }
                for (std::size_t i = 1; i < samples.size(); ++i) {
                    double dt = seconds_from_us(samples[i].time - samples[i - 1].time);
                    if (dt <= 0) continue;
                    ps.peak_tx_bps = std::max(
                        ps.peak_tx_bps, (samples[i].tx_bytes - samples[i - 1].tx_bytes) * 8.0 / dt);
                    ps.peak_rx_bps = std::max(
                        ps.peak_rx_bps, (samples[i].rx_bytes - samples[i - 1].rx_bytes) * 8.0 / dt);
                }
            }
            s.ports.push_back(ps);
        }
        s.offset_violations = offset_violations_;
        (void)duration_us;
        return s;
    }

    void export_all(const std::filesystem::path& out_dir, SimTime duration_us) const;

    const std::map<std::pair<std::string, RecordId>, E2eSample>& e2e_samples() const {
        return e2e_;
    }

  private:
    struct OffsetTrack {
        bool seen = false;
        std::int64_t last = -1;
        bool reset_pending = false;
    };
    struct OperatorStateRow {
        std::string job, key, value;
    };

    std::set<std::string> topics_;
    std::map<std::string, std::set<std::string>> subscribers_;
    std::vector<EventLine> events_;
    std::map<RecordId, ProducedInfo> produced_;
    std::set<std::pair<RecordId, std::string>> delivered_;
    std::vector<DeliveryRow> rows_;
    std::map<std::string, std::int64_t> duplicates_;
    std::map<std::pair<std::string, std::string>, OffsetTrack> offsets_;
    std::map<std::pair<std::string, RecordId>, E2eSample> e2e_;
    std::map<std::pair<std::string, int>, std::vector<PortSample>> ports_;
    std::map<std::string, std::set<RecordId>> final_logs_;
    std::vector<OperatorStateRow> operator_state_;
    std::int64_t offset_violations_ = 0;

    void write_svgs(const std::filesystem::path& out_dir, SimTime duration_us) const;
};

// ---------------------------------------------------------------------------
// CSV / log emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

inline std::string sanitize_filename(const std::string& s) {
    std::string out;
    for (char c : s) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    }
    return out;
}

}  // namespace detail

inline void MetricsStore::export_all(const std::filesystem::path& out_dir,
                                     SimTime duration_us) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    {
        auto out = detail::open_out(out_dir / "latency.csv");
        out << "topic,producer,producer_seq,consumer,produce_time_us,deliver_time_us\n";
        for (const auto& r : rows_) {
            out << detail::csv_quote(r.topic) << ',' << detail::csv_quote(r.producer) << ','
                << r.seq << ',' << detail::csv_quote(r.consumer) << ',' << r.produce_us << ','
                << r.deliver_us << '\n';
        }
    }
    {
        auto out = detail::open_out(out_dir / "delivery_matrix.csv");
        out << "producer,producer_seq,topic,consumer,delivered(Y|N)\n";
        for (const auto& [id, info] : produced_) {
            for (const auto& c : subscribers(info.topic)) {
                out << detail::csv_quote(id.producer) << ',' << id.seq << ','
                    << detail::csv_quote(info.topic) << ',' << detail::csv_quote(c) << ','
                    << (delivered_.count({id, c}) ? 'Y' : 'N') << '\n';
            }
        }
    }
    {
        auto out = detail::open_out(out_dir / "port_throughput.csv");
        out << "time_s,node,port,tx_bytes,rx_bytes\n";
        out << std::fixed << std::setprecision(3);
        for (const auto& [key, samples] : ports_) {
            for (const auto& s : samples) {
                out << seconds_from_us(s.time) << ',' << detail::csv_quote(key.first) << ','
                    << key.second << ',' << s.tx_bytes << ',' << s.rx_bytes << '\n';
            }
        }
    }
    {
        auto out = detail::open_out(out_dir / "events.log");
        for (const auto& e : events_) {
            out << e.time << ' ' << e.component << ' ' << e.kind;
            if (!e.detail.empty()) out << ' ' << e.detail;
            out << '\n';
        }
    }
    {
        auto out = detail::open_out(out_dir / "e2e_latency.csv");
        out << "sink,source_producer,source_seq,produce_time_us,complete_time_us\n";
        for (const auto& [key, s] : e2e_) {
            out << detail::csv_quote(s.sink) << ',' << detail::csv_quote(s.source.producer) << ','
                << s.source.seq << ',' << s.produce_us << ',' << s.complete_us << '\n';
        }
    }
    {
        auto out = detail::open_out(out_dir / "operator_state.csv");
        out << "job,key,value\n";
        for (const auto& r : operator_state_) {
            out << detail::csv_quote(r.job) << ',' << detail::csv_quote(r.key) << ','
                << detail::csv_quote(r.value) << '\n';
        }
    }
    {
        Summary s = summarize(duration_us);
        auto out = detail::open_out(out_dir / "summary.csv");
        out << "scope,name,metric,value\n";
        out << std::fixed << std::setprecision(3);
        for (const auto& [topic, t] : s.topics) {
            auto row = [&](const char* metric, auto value) {
                out << "topic," << detail::csv_quote(topic) << ',' << metric << ',' << value
                    << '\n';
            };
            row("produced", t.produced);
            row("acked", t.acked);
            row("delivered_unique", t.delivered_unique);
            row("lost", t.lost);
            row("acked_lost", t.acked_lost);
            row("duplicates", t.duplicates);
            row("in_flight", t.in_flight);
            row("delivery_count", t.delivery_count);
            row("latency_mean_us", t.latency_mean_us);
            row("latency_p50_us", t.latency_p50_us);
            row("latency_p99_us", t.latency_p99_us);
        }
        for (const auto& [sink, v] : s.sinks) {
            out << "sink," << detail::csv_quote(sink) << ",samples," << v.samples << '\n';
            out << "sink," << detail::csv_quote(sink) << ",e2e_mean_us," << v.e2e_mean_us << '\n';
            out << "sink," << detail::csv_quote(sink) << ",e2e_p50_us," << v.e2e_p50_us << '\n';
            out << "sink," << detail::csv_quote(sink) << ",e2e_p99_us," << v.e2e_p99_us << '\n';
        }
        for (const auto& p : s.ports) {
            std::string name = p.node + ":" + std::to_string(p.port);
            out << "port," << detail::csv_quote(name) << ",mean_rx_bps," << p.mean_rx_bps << '\n';
            out << "port," << detail::csv_quote(name) << ",mean_tx_bps," << p.mean_tx_bps << '\n';
            out << "port," << detail::csv_quote(name) << ",peak_rx_bps," << p.peak_rx_bps << '\n';
            out << "port," << detail::csv_quote(name) << ",peak_tx_bps," << p.peak_tx_bps << '\n';
        }
        out << "run,all,offset_violations," << s.offset_violations << '\n';
    }
    write_svgs(out_dir, duration_us);
}

// ---------------------------------------------------------------------------
// SVG renderings: minimal hand-rolled markup, CSV stays the canonical artifact
// ---------------------------------------------------------------------------

inline void MetricsStore::write_svgs(const std::filesystem::path& out_dir,
                                     SimTime duration_us) const {
    const int W = 900, H = 300, ML = 60, MB = 30;

    // latency vs delivery order, one file per topic
    std::map<std::string, std::vector<SimTime>> per_topic;
    for (const auto& r : rows_) per_topic[r.topic].push_back(r.deliver_us - r.produce_us);
    for (const auto& [topic, lats] : per_topic) {
        auto out =
            detail::open_out(out_dir / ("latency_" + detail::sanitize_filename(topic) + ".svg"));
        SimTime maxv = 1;
        for (SimTime v : lats) maxv = std::max(maxv, v);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\">\n<text x=\"10\" y=\"16\">latency (ms) by delivery order: " << topic
            << "</text>\n";
        double sx = static_cast<double>(W - ML - 10) / std::max<std::size_t>(1, lats.size());
        double sy = static_cast<double>(H - MB - 30) / static_cast<double>(maxv);
        for (std::size_t i = 0; i < lats.size(); ++i) {
            double x = ML + static_cast<double>(i) * sx;
            double y = H - MB - static_cast<double>(lats[i]) * sy;
            out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"1.2\" fill=\"#1f77b4\"/>\n";
        }
        out << "<text x=\"4\" y=\"" << H - MB << "\">0</text>\n<text x=\"4\" y=\"40\">"
            << static_cast<double>(maxv) / kUsPerMs << "</text>\n</svg>\n";
    }

    // per-port throughput lines with event annotations
    {
        auto out = detail::open_out(out_dir / "throughput.svg");
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\">\n<text x=\"10\" y=\"16\">port rx throughput (bytes per sample)</text>\n";
        double maxrate = 1.0;
        for (const auto& [key, samples] : ports_) {
            for (std::size_t i = 1; i < samples.size(); ++i) {
                maxrate = std::max(
                    maxrate, static_cast<double>(samples[i].rx_bytes - samples[i - 1].rx_bytes));
            }
        }
        const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
        int color = 0;
        double sx = static_cast<double>(W - ML - 10) / std::max<double>(1.0, seconds_from_us(duration_us));
        double sy = static_cast<double>(H - MB - 30) / maxrate;
        for (const auto& [key, samples] : ports_) {
            out << "<polyline fill=\"none\" stroke=\"" << palette[color++ % 8]
                << "\" stroke-width=\"1\" points=\"";
            for (std::size_t i = 1; i < samples.size(); ++i) {
                double x = ML + seconds_from_us(samples[i].time) * sx;
                double y = H - MB -
                           static_cast<double>(samples[i].rx_bytes - samples[i - 1].rx_bytes) * sy;
                out << x << ',' << y << ' ';
            }
            out << "\"/>\n";
        }
        int marker = 1;
        for (const auto& e : events_) {
            if (e.kind == "LeaderDisconnectDetected" || e.kind == "LeaderElected" ||
                e.kind == "BacklogServed" || e.kind == "LeadershipRestored") {
                double x = ML + seconds_from_us(e.time) * sx;
                out << "<line x1=\"" << x << "\" y1=\"30\" x2=\"" << x << "\" y2=\"" << H - MB
                    << "\" stroke=\"#444\" stroke-dasharray=\"4\"/>\n<text x=\"" << x + 2
                    << "\" y=\"" << 40 + 12 * marker << "\">" << marker << ":" << e.kind
                    << "</text>\n";
                ++marker;
            }
        }
        out << "</svg>\n";
    }

    // delivery matrix heat grid: consumers x produced records (time-bucketed)
    {
        auto out = detail::open_out(out_dir / "delivery_matrix.svg");
        std::set<std::string> consumers;
        for (const auto& [topic, subs] : subscribers_) consumers.insert(subs.begin(), subs.end());
        const int buckets = 200;
        std::map<std::string, std::vector<std::pair<int, int>>> grid;  // consumer -> (miss, total)
        for (const auto& c : consumers) grid[c] = std::vector<std::pair<int, int>>(buckets, {0, 0});
        for (const auto& [id, info] : produced_) {
            int b = static_cast<int>(
                std::min<std::int64_t>(buckets - 1, info.produce_us * buckets /
                                                        std::max<SimTime>(1, duration_us)));
            for (const auto& c : subscribers(info.topic)) {
                auto& cell = grid[c][static_cast<std::size_t>(b)];
                ++cell.second;
                if (!delivered_.count({id, c})) ++cell.first;
            }
        }
        int rows = static_cast<int>(consumers.size());
        int cell_h = rows > 0 ? std::max(4, (H - MB - 40) / rows) : 4;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\">\n<text x=\"10\" y=\"16\">delivery matrix (dark = missing)</text>\n";
        int row = 0;
        double cw = static_cast<double>(W - ML - 10) / buckets;
        for (const auto& [c, cells] : grid) {
            for (int b = 0; b < buckets; ++b) {
                const auto& cell = cells[static_cast<std::size_t>(b)];
                if (cell.second == 0) continue;
                double frac = static_cast<double>(cell.first) / cell.second;
                int shade = static_cast<int>(230 - 200 * frac);
                out << "<rect x=\"" << ML + b * cw << "\" y=\"" << 30 + row * cell_h
                    << "\" width=\"" << cw << "\" height=\"" << cell_h - 1 << "\" fill=\"rgb("
                    << shade << ',' << shade << ',' << shade << ")\"/>\n";
            }
            out << "<text x=\"2\" y=\"" << 30 + row * cell_h + cell_h / 2 << "\" font-size=\"9\">"
                << c << "</text>\n";
            ++row;
        }
        out << "</svg>\n";
    }
}

// ---------------------------------------------------------------------------
// CSV re-import, used to cross-check summaries against exported artifacts
// ---------------------------------------------------------------------------

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot read " + p.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                row.push_back(std::move(field));
                field.clear();
            } else {
                field += c;
            }
        }
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace streamforge
