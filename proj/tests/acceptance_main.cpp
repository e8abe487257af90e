// Acceptance suite: end-to-end checks of the shipped behaviors, one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "streamforge/net.hpp"
#include "streamforge/scenarios.hpp"
#include "streamforge/simulation.hpp"
#include "streamforge/sweep.hpp"

using namespace streamforge;
namespace fs = std::filesystem;

#ifndef STREAMFORGE_BIN
#define STREAMFORGE_BIN "streamforge"
#endif

namespace {

struct Check {
    std::string name;
    std::function<void()> fn;
};

std::vector<std::string> g_failures;

void expect(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path work_root() {
    static fs::path root = [] {
        fs::path p =
            fs::temp_directory_path() / ("sf_accept_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

double run_cli(const std::string& args) {
    std::string cmd = std::string(STREAMFORGE_BIN) + " " + args + " > /dev/null";
    auto t0 = std::chrono::steady_clock::now();
    int rc = std::system(cmd.c_str());
    auto t1 = std::chrono::steady_clock::now();
    expect(rc == 0, "CLI exited with status " + std::to_string(rc) + ": " + cmd);
    return std::chrono::duration<double>(t1 - t0).count();
}

ExperimentSpec partition_spec(std::uint64_t seed) {
    fs::path dir = work_root() / "partition_src";
    fs::path graphml = scenarios::install("partition", dir);
    ExperimentSpec spec = load_experiment(graphml);
    spec.seed = seed;
    return spec;
}

// ---------------------------------------------------------------------------
// 1. Determinism: byte-identical artifacts across two seeded CLI runs
// ---------------------------------------------------------------------------
void criterion_determinism() {
    fs::path out1 = work_root() / "det1";
    fs::path out2 = work_root() / "det2";
    double w1 = run_cli("--spec partition --seed 7 --out " + out1.string());
    double w2 = run_cli("--spec partition --seed 7 --out " + out2.string());
    expect(w1 < 60.0 && w2 < 60.0,
           "600 simulated seconds must take < 60 s wall, got " + std::to_string(w1) + " / " +
               std::to_string(w2));
    for (const char* name : {"events.log", "latency.csv", "delivery_matrix.csv"}) {
        std::string a = slurp(out1 / name);
        std::string b = slurp(out2 / name);
        expect(!a.empty(), std::string(name) + " is empty");
        expect(a == b, std::string(name) + " differs between identical runs");
    }
}

// ---------------------------------------------------------------------------
// 2. Partition-failure behavior on the bundled scenario (zk mode)
// ---------------------------------------------------------------------------
void criterion_partition_quality() {
    Simulation sim(partition_spec(7));
    sim.run();
    const MetricsStore& m = sim.metrics();
    const SimTime down_at = us_from_seconds(240);
    const SimTime up_at = us_from_seconds(360);

    // (a) every lost record: partitioned topic, co-located producer, inside
    // the partition window
    std::int64_t lost = 0;
    for (const auto& [rid, info] : m.produced()) {
        if (m.outcome(rid, info) != RecordOutcome::Lost) continue;
        ++lost;
        expect(info.topic == "topicA", "lost record on healthy topic " + rid.str());
        expect(rid.producer == "n03.prod", "lost record from producer " + rid.producer);
        expect(info.produce_us >= down_at && info.produce_us <= up_at,
               "lost record produced outside the partition window: " + rid.str());
    }
    expect(lost >= 1, "expected at least one lost record in zk mode");

    // (b) healthy topic from non-partitioned producers: 100% delivery
    // (drain margin: skip records produced in the final 5 s)
    const SimTime drain_limit = sim.spec().duration_us - us_from_seconds(5);
    for (const auto& [rid, info] : m.produced()) {
        if (info.topic != "topicB" || rid.producer == "n03.prod") continue;
        if (info.produce_us > drain_limit) continue;
        expect(m.outcome(rid, info) == RecordOutcome::DeliveredToAll,
               "undelivered healthy-topic record " + rid.str());
    }

    // (c) the four annotations appear in order
    auto t1 = m.first_event("LeaderDisconnectDetected", "topic=topicA");
    auto t2 = m.first_event("LeaderElected", "topic=topicA");
    auto t3 = m.first_event("BacklogServed", "topic=topicA");
    auto t4 = m.first_event("LeadershipRestored", "topic=topicA");
    expect(t1 && t2 && t3 && t4, "missing one of the four partition annotations");
    expect(*t1 < *t2 && *t2 < *t3 && *t3 < *t4, "annotations out of order");

    // (d) backlog conservation: bytes of held records (produced before the
    // election, committed by the new leader) delivered to each reachable
    // consumer within 10 s of the election equal the held volume +-2%
    std::int64_t held_bytes = 0;
    std::vector<RecordId> held;
    for (const auto& [rid, info] : m.produced()) {
        if (info.topic == "topicA" && info.commit_epoch == 2 && info.produce_us <= *t2) {
            held.push_back(rid);
            held_bytes += info.size_bytes;
        }
    }
    expect(held_bytes > 0, "no held backlog found");
    std::map<std::pair<RecordId, std::string>, SimTime> deliver_at;
    for (const auto& row : m.deliveries()) {
        deliver_at[{{row.producer, row.seq}, row.consumer}] = row.deliver_us;
    }
    for (int i = 1; i <= 10; ++i) {
        if (i == 3) continue;  // the co-located consumer is cut off
        char consumer[16];
        std::snprintf(consumer, sizeof consumer, "n%02d.cons", i);
        std::int64_t got = 0;
        for (const auto& rid : held) {
            auto it = deliver_at.find({rid, consumer});
            if (it != deliver_at.end() && it->second >= *t2 &&
                it->second <= *t2 + us_from_seconds(10)) {
                got += m.produced().at(rid).size_bytes;
            }
        }
        double ratio = static_cast<double>(got) / static_cast<double>(held_bytes);
        expect(std::abs(ratio - 1.0) <= 0.02,
               std::string(consumer) + " backlog volume off: " + std::to_string(got) + " vs " +
                   std::to_string(held_bytes));
    }
}

// ---------------------------------------------------------------------------
// 3. Raft-vs-zk differential on identical spec + seed
// ---------------------------------------------------------------------------
void criterion_raft_differential() {
    auto acked_lost_total = [](Simulation& sim) {
        std::int64_t total = 0;
        for (const auto& [topic, t] : sim.summarize().topics) total += t.acked_lost;
        return total;
    };
    Simulation zk(partition_spec(7));
    zk.run();
    std::int64_t zk_lost = acked_lost_total(zk);

    ExperimentSpec raft_spec = partition_spec(7);
    apply_override(raft_spec, "topic:topicA.consistencyMode", "raft");
    apply_override(raft_spec, "topic:topicB.consistencyMode", "raft");
    Simulation raft(std::move(raft_spec));
    raft.run();
    std::int64_t raft_lost = acked_lost_total(raft);

    expect(zk_lost >= 1, "zk mode lost nothing; expected >= 1 acked loss");
    expect(raft_lost == 0, "raft mode lost " + std::to_string(raft_lost) + " acked records");

    // differential oracle: replaying the ack trace against the final logs
    // matches the merge-time truncation reports in both modes
    for (Simulation* sim : {&zk, &raft}) {
        std::int64_t replayed = 0;
        for (const auto& [rid, info] : sim->metrics().produced()) {
            if (info.ack_us >= 0 && !sim->metrics().in_final_log(rid, info.topic)) ++replayed;
        }
        std::int64_t reported = 0;
        for (const auto& e : sim->metrics().events()) {
            if (e.kind == "LogReconciled") {
                reported += std::stoll(e.detail.substr(e.detail.find("acked_lost=") + 11));
            }
        }
        expect(replayed == reported, "trace replay disagrees with merge reports");
    }
}

// ---------------------------------------------------------------------------
// 4. Broker-link delay sweep against the hop-count oracle
// ---------------------------------------------------------------------------
void criterion_delay_sweep() {
    fs::path dir = work_root() / "delaysweep_src";
    ExperimentSpec base = load_experiment(scenarios::install("wordcount", dir));

    // per source record the broker access link is traversed four times:
    // producer->broker produce, broker->splitWords fetch response,
    // splitWords->broker produce, broker->countByKey fetch response
    const double hop_traversals = 4.0;
    const std::vector<double> delays = {10, 50, 100, 150};

    std::vector<double> mean_e2e;
    for (double d : delays) {
        ExperimentSpec spec = base;
        apply_override(spec, "link:b1-sw1.lat", std::to_string(d));
        Simulation sim(std::move(spec));
        sim.run();
        Summary s = sim.summarize();
        const SinkSummary& sink = s.sinks.at("spe2.spe");
        expect(sink.samples == 100, "expected 100 end-to-end samples, got " +
                                        std::to_string(sink.samples));
        mean_e2e.push_back(sink.e2e_mean_us);
    }
    for (std::size_t i = 1; i < delays.size(); ++i) {
        expect(mean_e2e[i] > mean_e2e[i - 1], "mean e2e latency not strictly increasing");
        double measured_slope =
            (mean_e2e[i] - mean_e2e[i - 1]) / ((delays[i] - delays[i - 1]) * kUsPerMs);
        expect(std::abs(measured_slope / hop_traversals - 1.0) <= 0.10,
               "slope " + std::to_string(measured_slope) + " deviates from the hop oracle " +
                   std::to_string(hop_traversals) + " by more than 10%");
    }
}

// ---------------------------------------------------------------------------
// 5. Throughput accuracy: 30 Kbps producer at the broker access port
// ---------------------------------------------------------------------------
void criterion_throughput_accuracy() {
    fs::path dir = work_root() / "throughput_src";
    ExperimentSpec spec = load_experiment(scenarios::install("throughput", dir));
    int b1_port = spec.find_link("b1-sw1")->port_a;
    Simulation sim(std::move(spec));
    sim.run();

    const auto& series = sim.metrics().port_series("b1", b1_port);
    const SimTime warmup = us_from_seconds(60);
    std::int64_t rx_at_warmup = -1, rx_at_end = -1;
    SimTime t_end = 0;
    for (const auto& s : series) {
        if (s.time == warmup) rx_at_warmup = s.rx_bytes;
        if (s.time >= t_end) {
            t_end = s.time;
            rx_at_end = s.rx_bytes;
        }
    }
    expect(rx_at_warmup >= 0, "no sample at the 60 s warm-up boundary");
    double rate_bps = static_cast<double>(rx_at_end - rx_at_warmup) * 8.0 /
                      seconds_from_us(t_end - warmup);
    expect(std::abs(rate_bps / 30000.0 - 1.0) <= 0.05,
           "broker access-port rx rate " + std::to_string(rate_bps) + " bps outside 30 Kbps +-5%");
}

// ---------------------------------------------------------------------------
// 6. Loss statistics: Bernoulli drops within 3 sigma for a 10-seed suite
// ---------------------------------------------------------------------------
void criterion_loss_statistics() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ExperimentSpec spec;
        spec.seed = seed;
        NodeSpec h1, h2;
        h1.id = "h1";
        h2.id = "h2";
        spec.nodes = {h1, h2};
        LinkSpec l;
        l.a = "h1";
        l.b = "h2";
        l.lat_us = 0;
        l.bw_mbps = 10000;
        l.loss_pct = 10.0;
        l.port_a = 1;
        l.port_b = 1;
        spec.links = {l};

        Engine eng;
        MetricsStore metrics;
        Network net(eng, spec, metrics);
        net.set_deliver([](Message&&) {});
        eng.schedule(0, "t", [&] {
            for (int i = 0; i < 10000; ++i) {
                net.send_frame("h1", "h2", Message{"a", "b", MsgHeartbeat{"a"}});
            }
        });
        eng.run_until(3600 * kUsPerSec);
        std::int64_t drops = net.link_stats("h1-h2").dropped_loss;
        // sigma = sqrt(10000 * 0.1 * 0.9) = 30
        expect(drops >= 1000 - 90 && drops <= 1000 + 90,
               "seed " + std::to_string(seed) + ": drops " + std::to_string(drops) +
                   " outside 1000 +- 90");
    }
}

// ---------------------------------------------------------------------------
// 7. Word-count oracle: pipeline output equals a single-pass count
// ---------------------------------------------------------------------------
void criterion_wordcount_oracle() {
    fs::path dir = work_root() / "wordcount_src";
    ExperimentSpec spec = load_experiment(scenarios::install("wordcount", dir));
    Simulation sim(std::move(spec));
    sim.run();

    // independent single-pass in-memory count over the same corpus
    std::map<std::string, std::int64_t> oracle;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "corpus")) files.push_back(e.path());
    expect(files.size() == 100, "expected the bundled 100-file corpus");
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string word;
        while (in >> word) ++oracle[word];
    }

    Summary s = sim.summarize();
    expect(s.topics.at("raw-data").in_flight == 0 &&
               s.topics.at("avg-words-per-topic").in_flight == 0,
           "pipeline did not drain");
    const auto& counts = sim.job("spe2")->counts();
    expect(counts == oracle, "word frequencies differ from the single-pass oracle");
}

// ---------------------------------------------------------------------------
// 8. Buffer stall points at 16 MiB and 32 MiB producer buffers
// ---------------------------------------------------------------------------
void criterion_buffer_stall() {
    auto stall_point = [](std::int64_t buffer_bytes) {
        ExperimentSpec spec;
        spec.seed = 1;
        spec.duration_us = 3 * kUsPerSec;
        NodeSpec p1, b1, sw;
        p1.id = "p1";
        ProducerSettings prod;
        prod.mode = ProducerMode::SyntheticRate;
        prod.rate_kbps = 1000000;  // fill the buffer quickly
        prod.record_size_bytes = 750;
        prod.buffer_bytes = buffer_bytes;
        prod.topic_weights = {{"t1", 1.0}};
        p1.producer = prod;
        b1.id = "b1";
        b1.broker = BrokerSettings{};
        sw.id = "sw1";
        sw.kind = NodeKind::Switch;
        spec.nodes = {p1, b1, sw};
        LinkSpec l1{"p1", "sw1", 1000, 100.0, 0.0, 1, 1};
        LinkSpec l2{"b1", "sw1", 1000, 100.0, 0.0, 1, 2};
        spec.links = {l1, l2};
        TopicSpec t;
        t.name = "t1";
        t.preferred_leader = "b1";
        spec.topics = {t};
        FaultSpec f;
        f.label = "cut";
        f.kind = FaultKind::LinkDown;
        f.target = "p1-sw1";
        spec.faults = {f};  // broker unreachable from t=0

        Simulation sim(std::move(spec));
        sim.run();
        expect(sim.producer("p1")->stalled(), "producer did not stall");
        return static_cast<std::int64_t>(sim.producer("p1")->emitted());
    };

    std::int64_t at16 = stall_point(16 * 1024 * 1024);
    std::int64_t at32 = stall_point(32 * 1024 * 1024);
    expect(at16 == 16 * 1024 * 1024 / 750,
           "16 MiB stall point " + std::to_string(at16) + " != " +
               std::to_string(16 * 1024 * 1024 / 750));
    expect(at32 == 32 * 1024 * 1024 / 750,
           "32 MiB stall point " + std::to_string(at32) + " != " +
               std::to_string(32 * 1024 * 1024 / 750));
}

// ---------------------------------------------------------------------------
// 9. Scalability smoke test: 10 sites x 3 components, 600 s simulated
// ---------------------------------------------------------------------------
void criterion_scalability() {
    fs::path out = work_root() / "scale";
    double wall = run_cli("--spec partition --out " + out.string());
    expect(wall < 300.0, "600 s simulated took " + std::to_string(wall) + " s wall (>5 min)");

    struct rusage ru{};
    getrusage(RUSAGE_CHILDREN, &ru);
    double peak_gb = static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);  // KiB -> GiB
    expect(peak_gb < 1.0,
           "peak child RSS " + std::to_string(peak_gb) + " GiB exceeds the 1 GiB budget");
    std::printf("        (wall %.1f s, peak rss %.2f GiB)\n", wall, peak_gb);
}

}  // namespace

int main() {
    std::vector<Check> checks = {
        {"determinism: partition run twice with seed 7 is byte-identical, < 60 s wall",
         criterion_determinism},
        {"partition quality: losses confined to window/topic/producer; annotations in order; "
         "backlog conserved +-2%",
         criterion_partition_quality},
        {"raft vs zk differential: zk loses >= 1 acked record, raft loses none",
         criterion_raft_differential},
        {"delay sweep: e2e latency strictly increasing, slope within 10% of the hop oracle",
         criterion_delay_sweep},
        {"throughput accuracy: broker port rx within 5% of 30 Kbps after warm-up",
         criterion_throughput_accuracy},
        {"loss statistics: drops within 3 sigma of Binomial(10000, 0.1) for 10 seeds",
         criterion_loss_statistics},
        {"word-count oracle: pipeline frequencies equal the single-pass count",
         criterion_wordcount_oracle},
        {"buffer stall: producer stalls at floor(buffer/recordSize) for 16 and 32 MiB",
         criterion_buffer_stall},
        {"scalability: 30-component partition run in < 5 min and < 1 GiB",
         criterion_scalability},
    };

    int idx = 0;
    for (const auto& c : checks) {
        ++idx;
        try {
            c.fn();
            std::printf("[PASS] %d. %s\n", idx, c.name.c_str());
        } catch (const std::exception& e) {
            std::printf("[FAIL] %d. %s\n       %s\n", idx, c.name.c_str(), e.what());
            g_failures.push_back(c.name);
        }
        std::fflush(stdout);
    }
    if (!g_failures.empty()) {
        std::printf("%zu criterion(s) failed\n", g_failures.size());
        return 1;
    }
    std::printf("all %d criteria passed\n", idx);
    return 0;
}
