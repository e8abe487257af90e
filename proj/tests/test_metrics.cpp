#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sim_test_util.hpp"

using namespace streamforge;
using namespace sft;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("sf_mx_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentSpec small_faulted_spec(std::uint64_t seed) {
    SpecBuilder b;
    b.seed(seed).duration_s(60);
    ProducerSettings p = synthetic_producer(40, 500, {{"tA", 1.0}, {"tB", 1.0}});
    p.produce_timeout_us = 50 * kUsPerSec;
    b.site("n1", {.broker = true, .producer = p, .consumer = consumer_of({"tA", "tB"})});
    b.site("n2", {.broker = true, .producer = p, .consumer = consumer_of({"tA", "tB"})});
    b.site("n3", {.broker = true});
    b.topic("tA", "n2", 2, ConsistencyMode::Zk);
    b.topic("tB", "n3", 2, ConsistencyMode::Zk);
    b.fault(FaultKind::LinkDown, "n2-sw1", 20.0);
    b.fault(FaultKind::LinkUp, "n2-sw1", 35.0);
    return b.build();
}

}  // namespace

TEST_CASE("export writes the full artifact set") {
    TempDir out;
    Simulation sim(small_faulted_spec(3));
    sim.run();
    sim.export_all(out.path);

    for (const char* name :
         {"latency.csv", "delivery_matrix.csv", "port_throughput.csv", "events.log",
          "e2e_latency.csv", "operator_state.csv", "summary.csv", "throughput.svg",
          "delivery_matrix.svg", "latency_tA.svg", "latency_tB.svg"}) {
        INFO(name);
        REQUIRE(fs::exists(out.path / name));
    }

    // pinned headers
    REQUIRE(slurp(out.path / "latency.csv")
                .starts_with("topic,producer,producer_seq,consumer,produce_time_us,deliver_time_us"));
    REQUIRE(slurp(out.path / "delivery_matrix.csv")
                .starts_with("producer,producer_seq,topic,consumer,delivered(Y|N)"));
    REQUIRE(slurp(out.path / "port_throughput.csv")
                .starts_with("time_s,node,port,tx_bytes,rx_bytes"));
}

TEST_CASE("a zero-duration run exports headers-only CSVs") {
    TempDir out;
    SpecBuilder b;
    b.site("n1", {.broker = true});
    ExperimentSpec spec = b.build();
    spec.duration_us = 0;
    Simulation sim(spec);
    sim.run();
    sim.export_all(out.path);
    REQUIRE(slurp(out.path / "latency.csv") ==
            "topic,producer,producer_seq,consumer,produce_time_us,deliver_time_us\n");
    REQUIRE(slurp(out.path / "delivery_matrix.csv") ==
            "producer,producer_seq,topic,consumer,delivered(Y|N)\n");
}

TEST_CASE("fault-free run: all delivered, no election entries in events.log") {
    TempDir out;
    SpecBuilder b;
    b.duration_s(30);
    b.site("n1", {.broker = true,
                  .producer = synthetic_producer(40, 500, {{"t1", 1.0}}),
                  .consumer = consumer_of({"t1"})});
    b.topic("t1", "n1", 1);
    Simulation sim(b.build());
    sim.run();
    sim.export_all(out.path);

    std::string events = slurp(out.path / "events.log");
    REQUIRE(events.find("LeaderElected") == std::string::npos);
    REQUIRE(events.find("LeaderDisconnectDetected") == std::string::npos);

    // delivery matrix all Y
    for (const auto& row : read_csv(out.path / "delivery_matrix.csv")) {
        if (row[0] == "producer") continue;
        REQUIRE(row[4] == "Y");
    }
}

TEST_CASE("accounting identity holds and is reproducible from the exports") {
    TempDir out;
    Simulation sim(small_faulted_spec(3));
    sim.run();
    sim.export_all(out.path);
    Summary s = sim.summarize();

    // produced counted independently from the delivery matrix
    std::map<std::string, std::set<std::pair<std::string, std::string>>> produced_ids;
    std::map<std::string, std::map<std::pair<std::string, std::string>, bool>> full;
    for (const auto& row : read_csv(out.path / "delivery_matrix.csv")) {
        if (row[0] == "producer") continue;
        auto key = std::make_pair(row[0], row[1]);
        produced_ids[row[2]].insert(key);
        auto [it, fresh] = full[row[2]].emplace(key, true);
        if (row[4] != "Y") it->second = false;
    }
    for (const auto& [topic, t] : s.topics) {
        INFO(topic);
        REQUIRE(t.produced == static_cast<std::int64_t>(produced_ids[topic].size()));
        REQUIRE(t.produced == t.delivered_unique + t.lost + t.in_flight);
        std::int64_t full_count = 0;
        for (const auto& [id, ok] : full[topic]) {
            if (ok) ++full_count;
        }
        // records the matrix shows fully delivered but the summary calls lost
        // are exactly the acked-then-truncated ones delivered pre-merge
        REQUIRE(full_count >= t.delivered_unique);
        REQUIRE(full_count - t.delivered_unique <= t.acked_lost);
    }

    // every latency sample respects causality
    for (const auto& row : sim.metrics().deliveries()) {
        REQUIRE(row.deliver_us >= row.produce_us);
    }
}

TEST_CASE("summary statistics can be recomputed exactly from latency.csv") {
    TempDir out;
    Simulation sim(small_faulted_spec(9));
    sim.run();
    sim.export_all(out.path);
    Summary s = sim.summarize();

    std::map<std::string, std::vector<SimTime>> lat;
    for (const auto& row : read_csv(out.path / "latency.csv")) {
        if (row[0] == "topic") continue;
        lat[row[0]].push_back(std::stoll(row[5]) - std::stoll(row[4]));
    }
    for (auto& [topic, v] : lat) {
        INFO(topic);
        REQUIRE(s.topics.count(topic));
        const TopicSummary& t = s.topics.at(topic);
        REQUIRE(static_cast<std::int64_t>(v.size()) == t.delivery_count);
        double sum = 0;
        for (SimTime x : v) sum += static_cast<double>(x);
        REQUIRE(t.latency_mean_us == sum / static_cast<double>(v.size()));
        std::sort(v.begin(), v.end());
        auto pick = [&v](double p) {
            auto idx = static_cast<std::size_t>(
                           std::max(1.0, std::ceil(p / 100.0 * static_cast<double>(v.size())))) -
                       1;
            return v[std::min(idx, v.size() - 1)];
        };
        REQUIRE(t.latency_p50_us == pick(50));
        REQUIRE(t.latency_p99_us == pick(99));
    }
}

TEST_CASE("identical spec and seed export byte-identical artifacts") {
    TempDir out1, out2;
    {
        Simulation sim(small_faulted_spec(7));
        sim.run();
        sim.export_all(out1.path);
    }
    {
        Simulation sim(small_faulted_spec(7));
        sim.run();
        sim.export_all(out2.path);
    }
    for (const char* name : {"events.log", "latency.csv", "delivery_matrix.csv",
                             "port_throughput.csv", "summary.csv"}) {
        INFO(name);
        REQUIRE(slurp(out1.path / name) == slurp(out2.path / name));
    }
    // a different seed diverges
    TempDir out3;
    Simulation sim(small_faulted_spec(8));
    sim.run();
    sim.export_all(out3.path);
    REQUIRE(slurp(out1.path / "latency.csv") != slurp(out3.path / "latency.csv"));
}

TEST_CASE("faults only affect their targets: untouched flows trace identically") {
    // pair A (n1 -> n2) and pair B (n3 -> n4) share only the hub; the fault
    // hits n4's spoke, so pair A must be byte-identical with and without it
    auto build = [](bool with_fault) {
        SpecBuilder b;
        b.duration_s(30);
        b.site("n1", {.broker = false, .producer = synthetic_producer(40, 500, {{"tA", 1.0}})});
        b.site("n2", {.broker = true, .consumer = consumer_of({"tA"})});
        b.site("n3", {.broker = false, .producer = synthetic_producer(40, 500, {{"tB", 1.0}})});
        b.site("n4", {.broker = true, .consumer = consumer_of({"tB"})});
        b.topic("tA", "n2", 1);
        b.topic("tB", "n4", 1);
        if (with_fault) {
            b.fault(FaultKind::LinkDown, "n4-sw1", 10.0);
            b.fault(FaultKind::LinkUp, "n4-sw1", 20.0);
        }
        return b.build();
    };
    auto trace_of = [](Simulation& sim) {
        std::vector<std::tuple<std::string, std::uint64_t, SimTime, SimTime>> rows;
        for (const auto& r : sim.metrics().deliveries()) {
            if (r.topic == "tA") rows.emplace_back(r.producer, r.seq, r.produce_us, r.deliver_us);
        }
        return rows;
    };
    Simulation faulted(build(true));
    faulted.run();
    Simulation clean(build(false));
    clean.run();
    REQUIRE(trace_of(faulted) == trace_of(clean));

    // while the faulted flow clearly diverged
    REQUIRE(faulted.summarize().topics.at("tB").latency_p99_us >
            clean.summarize().topics.at("tB").latency_p99_us);
}

TEST_CASE("setLoss degrades one link and linkUp restores the floor") {
    SpecBuilder b;
    b.seed(21).duration_s(60);
    b.site("n1", {.broker = false, .producer = synthetic_producer(400, 500, {{"tA", 1.0}})});
    b.site("n2", {.broker = true, .consumer = consumer_of({"tA"})});
    b.fault(FaultKind::SetLoss, "n1-sw1", 10.0, 50.0);
    b.topic("tA", "n2", 1);
    ExperimentSpec spec = b.build();
    Simulation sim(spec);
    sim.run();

    REQUIRE(sim.network().effective_loss("n1-sw1") == 50.0);
    REQUIRE(sim.network().effective_loss("n2-sw1") == 0.0);
    REQUIRE(sim.network().link_stats("n1-sw1").dropped_loss > 0);
    REQUIRE(sim.network().link_stats("n2-sw1").dropped_loss == 0);
    // producer keeps retrying dropped records: no acked record is lost
    REQUIRE(sim.summarize().topics.at("tA").acked_lost == 0);
    REQUIRE(sim.metrics().first_event("FaultApplied", "kind=setLoss"));
}

TEST_CASE("duplicate deliveries mark the matrix once and count separately") {
    MetricsStore m;
    m.set_subscribers("t1", {"c1"});
    Record r;
    r.topic = "t1";
    r.producer = "p1";
    r.seq = 4;
    r.size_bytes = 100;
    r.produce_us = 1 * kUsPerSec;
    r.source = r.id();
    m.on_produced(r);
    REQUIRE(m.on_delivered("c1", r, 0, 1 * kUsPerSec + 250 * kUsPerMs));
    REQUIRE_FALSE(m.on_delivered("c1", r, 0, 2 * kUsPerSec));  // duplicate fetch
    REQUIRE(m.deliveries().size() == 1);
    REQUIRE(m.deliveries()[0].deliver_us - m.deliveries()[0].produce_us == 250 * kUsPerMs);
    m.set_final_log("t1", {r.id()});
    Summary s = m.summarize(10 * kUsPerSec);
    REQUIRE(s.topics.at("t1").duplicates == 1);
    REQUIRE(s.topics.at("t1").delivery_count == 1);
    REQUIRE(s.topics.at("t1").latency_p50_us == 250 * kUsPerMs);
}

TEST_CASE("delivery before production is rejected as corrupt") {
    MetricsStore m;
    Record r;
    r.topic = "t1";
    r.producer = "p1";
    r.seq = 0;
    r.produce_us = 5;
    m.on_produced(r);
    REQUIRE_THROWS_AS(m.on_delivered("c1", r, 0, 4), Error);
}
