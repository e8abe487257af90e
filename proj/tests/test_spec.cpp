#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "streamforge/net.hpp"
#include "streamforge/random.hpp"
#include "streamforge/spec.hpp"

using namespace streamforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("sf_spec_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(path / name);
        out << text;
    }
};

const char* kMinimalGraph = R"(<?xml version="1.0"?>
<graphml>
  <key id="lat" for="edge" attr.name="lat" attr.type="string"/>
  <key id="bw" for="edge" attr.name="bw" attr.type="string"/>
  <key id="loss" for="edge" attr.name="loss" attr.type="string"/>
  <graph id="mini" edgedefault="undirected">
    <node id="h1"/>
    <node id="h2"/>
    <edge source="h1" target="h2">
      <data key="lat">10</data>
      <data key="bw">100</data>
      <data key="loss">0</data>
    </edge>
  </graph>
</graphml>
)";

// producer -> broker -> two jobs -> consumer, all behind one switch
std::string pipeline_graphml() {
    return R"(<?xml version="1.0"?>
<graphml>
  <key id="topicCfg" for="graph" attr.name="topicCfg" attr.type="string"/>
  <key id="seed" for="graph" attr.name="seed" attr.type="string"/>
  <key id="duration" for="graph" attr.name="duration" attr.type="string"/>
  <key id="prodType" for="node" attr.name="prodType" attr.type="string"/>
  <key id="prodCfg" for="node" attr.name="prodCfg" attr.type="string"/>
  <key id="consType" for="node" attr.name="consType" attr.type="string"/>
  <key id="consCfg" for="node" attr.name="consCfg" attr.type="string"/>
  <key id="streamProcType" for="node" attr.name="streamProcType" attr.type="string"/>
  <key id="streamProcCfg" for="node" attr.name="streamProcCfg" attr.type="string"/>
  <key id="brokerCfg" for="node" attr.name="brokerCfg" attr.type="string"/>
  <key id="lat" for="edge" attr.name="lat" attr.type="string"/>
  <key id="bw" for="edge" attr.name="bw" attr.type="string"/>
  <graph id="wordcount" edgedefault="undirected">
    <data key="topicCfg">topics.yaml</data>
    <data key="seed">3</data>
    <data key="duration">60</data>
    <node id="p1">
      <data key="prodType">fileOfDirectory</data>
      <data key="prodCfg">producer.yaml</data>
    </node>
    <node id="b1"><data key="brokerCfg">broker.yaml</data></node>
    <node id="spe1">
      <data key="streamProcType">builtin</data>
      <data key="streamProcCfg">spe1.yaml</data>
    </node>
    <node id="spe2">
      <data key="streamProcType">builtin</data>
      <data key="streamProcCfg">spe2.yaml</data>
    </node>
    <node id="c1">
      <data key="consType">logger</data>
      <data key="consCfg">consumer.yaml</data>
    </node>
    <node id="sw1"/>
    <edge source="p1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="b1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="spe1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="spe2" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="c1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
  </graph>
</graphml>
)";
}

TempDir pipeline_fixture() {
    TempDir dir;
    dir.write("topics.yaml",
              "raw-data: b1,1,zk\n"
              "avg-words-per-topic: b1,1,zk\n");
    dir.write("producer.yaml",
              "mode: fileOfDirectory\n"
              "path: corpus\n"
              "rateKbps: 8\n"
              "topics: raw-data\n");
    dir.write("broker.yaml", "");
    dir.write("spe1.yaml",
              "kind: splitWords\ninTopic: raw-data\noutTopic: avg-words-per-topic\n");
    dir.write("spe2.yaml", "kind: countByKey\ninTopic: avg-words-per-topic\noutTopic: sink\n");
    dir.write("consumer.yaml", "topics: avg-words-per-topic\n");
    fs::create_directories(dir.path / "corpus");
    std::ofstream(dir.path / "corpus" / "doc0.txt") << "alpha beta alpha\n";
    return dir;
}

}  // namespace

TEST_CASE("minimal two-host graph parses") {
    TempDir dir;
    ExperimentSpec spec = parse_experiment(kMinimalGraph, dir.path);
    REQUIRE(spec.nodes.size() == 2);
    REQUIRE(spec.links.size() == 1);
    REQUIRE(spec.topics.empty());
    REQUIRE(spec.seed == kDefaultSeed);
    REQUIRE(spec.duration_us == us_from_seconds(600));
    REQUIRE(spec.links[0].lat_us == 10 * kUsPerMs);
    REQUIRE(spec.links[0].bw_mbps == 100.0);
    // auto-assigned ports
    REQUIRE(spec.links[0].port_a == 1);
    REQUIRE(spec.links[0].port_b == 1);
}

TEST_CASE("word-count pipeline parses to 6 nodes and 2 topics") {
    TempDir dir = pipeline_fixture();
    ExperimentSpec spec = parse_experiment(pipeline_graphml(), dir.path);
    REQUIRE(spec.nodes.size() == 6);
    REQUIRE(spec.topics.size() == 2);
    REQUIRE(spec.find_node("sw1")->is_switch());
    REQUIRE_FALSE(spec.find_node("spe1")->is_switch());  // 's' prefix but not a switch name
    REQUIRE(spec.find_node("b1")->hosts_broker());
    REQUIRE(spec.find_node("spe1")->job->kind == OperatorKind::SplitWords);
    REQUIRE(spec.find_node("p1")->producer->mode == ProducerMode::FileOfDirectory);
    REQUIRE(spec.seed == 3);
    REQUIRE(spec.duration_us == us_from_seconds(60));
    REQUIRE(spec.find_topic("raw-data")->preferred_leader == "b1");
}

TEST_CASE("loss outside [0,100] is rejected naming the link") {
    TempDir dir;
    std::string text = kMinimalGraph;
    auto pos = text.find("<data key=\"loss\">0<");
    text.replace(pos, std::string("<data key=\"loss\">0<").size(), "<data key=\"loss\">120<");
    try {
        parse_experiment(text, dir.path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("h1-h2") != std::string::npos);
        REQUIRE(msg.find("[0,100]") != std::string::npos);
    }
}

TEST_CASE("unknown attribute keys are rejected, not ignored") {
    TempDir dir;
    std::string text = kMinimalGraph;
    auto pos = text.find("<graph ");
    text.insert(pos, "<key id=\"mtu\" for=\"edge\" attr.name=\"mtu\" attr.type=\"string\"/>\n");
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ParseError);
}

TEST_CASE("malformed xml is a parse error") {
    TempDir dir;
    REQUIRE_THROWS_AS(parse_experiment("<graphml><graph>", dir.path), ParseError);
    REQUIRE_THROWS_AS(parse_experiment("not xml at all", dir.path), ParseError);
}

TEST_CASE("dangling config reference raises MissingConfigError") {
    TempDir dir = pipeline_fixture();
    fs::remove(dir.path / "spe2.yaml");
    REQUIRE_THROWS_AS(parse_experiment(pipeline_graphml(), dir.path), MissingConfigError);
}

TEST_CASE("switches cannot carry component attributes") {
    TempDir dir = pipeline_fixture();
    std::string text = pipeline_graphml();
    auto pos = text.find("<node id=\"sw1\"/>");
    text.replace(pos, std::string("<node id=\"sw1\"/>").size(),
                 "<node id=\"sw1\"><data key=\"brokerCfg\">broker.yaml</data></node>");
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ValidationError);
}

TEST_CASE("replication factor above broker count is rejected") {
    TempDir dir = pipeline_fixture();
    dir.write("topics.yaml", "raw-data: b1,2,zk\navg-words-per-topic: b1,1,zk\n");
    REQUIRE_THROWS_AS(parse_experiment(pipeline_graphml(), dir.path), ValidationError);
}

TEST_CASE("topic leader must host a broker") {
    TempDir dir = pipeline_fixture();
    dir.write("topics.yaml", "raw-data: p1,1,zk\navg-words-per-topic: b1,1,zk\n");
    REQUIRE_THROWS_AS(parse_experiment(pipeline_graphml(), dir.path), ValidationError);
}

TEST_CASE("unknown config keys are rejected") {
    TempDir dir = pipeline_fixture();
    dir.write("consumer.yaml", "topics: avg-words-per-topic\ncolor: blue\n");
    REQUIRE_THROWS_AS(parse_experiment(pipeline_graphml(), dir.path), ValidationError);
}

TEST_CASE("duplicate node ids are rejected") {
    TempDir dir;
    std::string text = kMinimalGraph;
    auto pos = text.find("<node id=\"h2\"/>");
    text.insert(pos, "<node id=\"h1\"/>");
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ValidationError);
}

TEST_CASE("parsing is a pure function of its inputs") {
    TempDir dir = pipeline_fixture();
    ExperimentSpec a = parse_experiment(pipeline_graphml(), dir.path);
    ExperimentSpec b = parse_experiment(pipeline_graphml(), dir.path);
    REQUIRE(a == b);
}

TEST_CASE("graphml round trip reproduces the spec") {
    TempDir dir = pipeline_fixture();
    ExperimentSpec a = parse_experiment(pipeline_graphml(), dir.path);
    std::string emitted = serialize_graphml(a);
    ExperimentSpec b = parse_experiment(emitted, dir.path);
    REQUIRE(a == b);

    TempDir mini;
    ExperimentSpec m = parse_experiment(kMinimalGraph, mini.path);
    REQUIRE(parse_experiment(serialize_graphml(m), mini.path) == m);
}

TEST_CASE("faults parse, sort by time, and validate targets") {
    TempDir dir = pipeline_fixture();
    std::string text = pipeline_graphml();
    auto pos = text.find("<data key=\"topicCfg\">");
    text.insert(pos, "<data key=\"faultCfg\">faults.yaml</data>");
    text.insert(text.find("<key id=\"topicCfg\""),
                "<key id=\"faultCfg\" for=\"graph\" attr.name=\"faultCfg\" attr.type=\"string\"/>\n");

    dir.write("faults.yaml",
              "f2: linkUp,b1-sw1,30\n"
              "f1: linkDown,sw1-b1,10\n"  // reversed orientation resolves too
              "f3: setLoss,p1-sw1,5,25\n");
    ExperimentSpec spec = parse_experiment(text, dir.path);
    REQUIRE(spec.faults.size() == 3);
    REQUIRE(spec.faults[0].label == "f3");
    REQUIRE(spec.faults[1].kind == FaultKind::LinkDown);
    REQUIRE(spec.faults[2].at_us == us_from_seconds(30));

    dir.write("faults.yaml", "f1: linkDown,nope-sw1,10\n");
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ValidationError);

    dir.write("faults.yaml", "f1: linkDown,b1-sw1,9999\n");  // beyond duration
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ValidationError);
}

TEST_CASE("every catalogued attribute key parses into the spec") {
    TempDir dir = pipeline_fixture();
    dir.write("store.yaml", "writeLatencyUs: 900\nreadLatencyUs: 300\n");
    dir.write("faults.yaml", "f1: setLoss,c1-sw1,10,25\n");
    std::string text = R"(<?xml version="1.0"?>
<graphml>
  <key id="topicCfg" for="graph" attr.name="topicCfg" attr.type="string"/>
  <key id="faultCfg" for="graph" attr.name="faultCfg" attr.type="string"/>
  <key id="seed" for="graph" attr.name="seed" attr.type="string"/>
  <key id="duration" for="graph" attr.name="duration" attr.type="string"/>
  <key id="prodType" for="node" attr.name="prodType" attr.type="string"/>
  <key id="prodCfg" for="node" attr.name="prodCfg" attr.type="string"/>
  <key id="consType" for="node" attr.name="consType" attr.type="string"/>
  <key id="consCfg" for="node" attr.name="consCfg" attr.type="string"/>
  <key id="streamProcType" for="node" attr.name="streamProcType" attr.type="string"/>
  <key id="streamProcCfg" for="node" attr.name="streamProcCfg" attr.type="string"/>
  <key id="storeType" for="node" attr.name="storeType" attr.type="string"/>
  <key id="storeCfg" for="node" attr.name="storeCfg" attr.type="string"/>
  <key id="brokerCfg" for="node" attr.name="brokerCfg" attr.type="string"/>
  <key id="cpuPercentage" for="node" attr.name="cpuPercentage" attr.type="string"/>
  <key id="lat" for="edge" attr.name="lat" attr.type="string"/>
  <key id="bw" for="edge" attr.name="bw" attr.type="string"/>
  <key id="loss" for="edge" attr.name="loss" attr.type="string"/>
  <key id="st" for="edge" attr.name="st" attr.type="string"/>
  <key id="dt" for="edge" attr.name="dt" attr.type="string"/>
  <graph id="full" edgedefault="undirected">
    <data key="topicCfg">topics.yaml</data>
    <data key="faultCfg">faults.yaml</data>
    <data key="seed">17</data>
    <data key="duration">45</data>
    <node id="p1">
      <data key="prodType">fileOfDirectory</data>
      <data key="prodCfg">producer.yaml</data>
      <data key="cpuPercentage">0.5</data>
    </node>
    <node id="b1"><data key="brokerCfg">broker.yaml</data></node>
    <node id="spe1">
      <data key="streamProcType">builtin</data>
      <data key="streamProcCfg">spe1.yaml</data>
    </node>
    <node id="spe2">
      <data key="streamProcType">builtin</data>
      <data key="streamProcCfg">spe2.yaml</data>
    </node>
    <node id="c1">
      <data key="consType">logger</data>
      <data key="consCfg">consumer.yaml</data>
      <data key="storeType">kv</data>
      <data key="storeCfg">store.yaml</data>
    </node>
    <node id="sw1"/>
    <edge source="p1" target="sw1">
      <data key="lat">1.5</data><data key="bw">250</data><data key="loss">2</data>
      <data key="st">7</data><data key="dt">9</data>
    </edge>
    <edge source="b1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="spe1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="spe2" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
    <edge source="c1" target="sw1"><data key="lat">1</data><data key="bw">100</data></edge>
  </graph>
</graphml>
)";
    ExperimentSpec spec = parse_experiment(text, dir.path);
    REQUIRE(spec.seed == 17);
    REQUIRE(spec.duration_us == us_from_seconds(45));
    REQUIRE(spec.faults.size() == 1);
    REQUIRE(spec.faults[0].param == 25.0);
    const NodeSpec* p1 = spec.find_node("p1");
    REQUIRE(p1->cpu_percentage == 0.5);
    REQUIRE(p1->producer->mode == ProducerMode::FileOfDirectory);
    const NodeSpec* c1 = spec.find_node("c1");
    REQUIRE(c1->store.has_value());
    REQUIRE(c1->store->write_latency_us == 900);
    const LinkSpec* l = spec.find_link("p1-sw1");
    REQUIRE(l->lat_us == 1500);
    REQUIRE(l->bw_mbps == 250.0);
    REQUIRE(l->loss_pct == 2.0);
    REQUIRE(l->port_a == 7);
    REQUIRE(l->port_b == 9);
    // round trip preserves every populated key
    REQUIRE(parse_experiment(serialize_graphml(spec), dir.path) == spec);
}

TEST_CASE("duplicate (endpoint, port) pairs are rejected") {
    TempDir dir;
    std::string text = R"(<?xml version="1.0"?>
<graphml>
  <key id="st" for="edge" attr.name="st" attr.type="string"/>
  <graph id="ports" edgedefault="undirected">
    <node id="h1"/><node id="h2"/><node id="h3"/>
    <edge source="h1" target="h2"><data key="st">1</data></edge>
    <edge source="h1" target="h3"><data key="st">1</data></edge>
  </graph>
</graphml>
)";
    REQUIRE_THROWS_AS(parse_experiment(text, dir.path), ValidationError);
}

TEST_CASE("property: randomized topologies round-trip and route symmetrically") {
    RandomSource rng(2024, "spec-gen");
    for (int iter = 0; iter < 30; ++iter) {
        TempDir dir;
        ExperimentSpec spec;
        spec.seed = iter;
        spec.duration_us = us_from_seconds(60);
        int hosts = 2 + static_cast<int>(rng.next_below(5));
        int switches = 1 + static_cast<int>(rng.next_below(2));
        for (int h = 0; h < hosts; ++h) {
            NodeSpec n;
            n.id = "h" + std::to_string(h);
            spec.nodes.push_back(n);
        }
        for (int s = 0; s < switches; ++s) {
            NodeSpec n;
            n.id = "s" + std::to_string(s);
            n.kind = NodeKind::Switch;
            spec.nodes.push_back(n);
        }
        int port = 1;
        // every host hangs off a random switch; switches form a chain
        for (int h = 0; h < hosts; ++h) {
            LinkSpec l;
            l.a = "h" + std::to_string(h);
            l.b = "s" + std::to_string(rng.next_below(static_cast<std::uint64_t>(switches)));
            l.lat_us = us_from_ms(static_cast<double>(rng.next_below(50)));
            l.bw_mbps = 1.0 + static_cast<double>(rng.next_below(1000));
            l.loss_pct = static_cast<double>(rng.next_below(100));
            l.port_a = port++;
            l.port_b = port++;
            spec.links.push_back(l);
        }
        for (int s = 0; s + 1 < switches; ++s) {
            LinkSpec l;
            l.a = "s" + std::to_string(s);
            l.b = "s" + std::to_string(s + 1);
            l.bw_mbps = 100;
            l.port_a = port++;
            l.port_b = port++;
            spec.links.push_back(l);
        }

        ExperimentSpec reparsed = parse_experiment(serialize_graphml(spec), dir.path);
        REQUIRE(reparsed == spec);

        RoutingTable routes = compute_routes(spec);
        for (const auto& [pair, path] : routes) {
            const auto& back = routes.at({pair.second, pair.first});
            REQUIRE(back.size() == path.size());  // hop counts are symmetric
            REQUIRE(path.front() == pair.first);
            REQUIRE(path.back() == pair.second);
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                REQUIRE(spec.find_link(path[i] + "-" + path[i + 1]) != nullptr);
            }
        }
    }
}
