#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "streamforge/errors.hpp"
#include "streamforge/random.hpp"
#include "streamforge/spec.hpp"

namespace streamforge {

/// Bundled, self-contained experiment scenarios. `install` materializes the
/// GraphML + YAML files (and data corpus where needed) into a directory so
/// they can be run directly or edited as starting points.
namespace scenarios {

inline const std::vector<std::pair<std::string, std::string>>& list() {
    static const std::vector<std::pair<std::string, std::string>> entries = {
        {"wordcount",
         "file-stream word count pipeline: producer, broker, two processing jobs, consumer"},
        {"partition",
         "10 replicated-broker sites in a star, two topics, 120 s leader disconnection"},
        {"delaysweep",
         "wordcount wired for a broker-link delay sweep (lat of link b1-sw1)"},
        {"throughput",
         "single 30 Kbps producer into one broker, for port-rate accuracy runs"},
    };
    return entries;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
}

inline std::string graphml_header(const std::string& graph_id) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<graphml>\n";
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
    os << "  <graph id=\"" << graph_id << "\" edgedefault=\"undirected\">\n";
    return os.str();
}

inline std::string edge(const std::string& a, const std::string& b, double lat_ms, double bw_mbps,
                        double loss = 0.0) {
    std::ostringstream os;
    os << "    <edge source=\"" << a << "\" target=\"" << b << "\">"
       << "<data key=\"lat\">" << lat_ms << "</data>"
       << "<data key=\"bw\">" << bw_mbps << "</data>"
       << "<data key=\"loss\">" << loss << "</data></edge>\n";
    return os.str();
}

/// Deterministic 100-file text corpus; every document is at least 500 bytes
/// so the 8 Kbps producer paces slower than any swept round trip.
inline void write_corpus(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    static const char* words[] = {
        "stream",  "broker",   "topic",    "record", "window",  "latency", "replica",
        "leader",  "election", "backlog",  "offset", "consume", "produce", "pipeline",
        "cluster", "packet",   "monitor",  "fault",  "deliver", "publish", "subscribe",
        "metric",  "queue",    "log",      "batch",  "commit",  "fetch",   "node",
        "switch",  "link",     "payload",  "epoch",  "quorum",  "merge",   "restore"};
    constexpr int kWordCount = sizeof(words) / sizeof(words[0]);
    RandomSource rng(42, "corpus");
    for (int doc = 0; doc < 100; ++doc) {
        std::ostringstream text;
        std::size_t bytes = 0;
        int col = 0;
        while (bytes < 520) {
            const char* w = words[rng.next_below(kWordCount)];
            text << w;
            bytes += std::string(w).size() + 1;
            if (++col == 10) {
                text << "\n";
                col = 0;
            } else {
                text << " ";
            }
        }
        text << "\n";
        char name[32];
        std::snprintf(name, sizeof name, "doc_%03d.txt", doc);
        write_file(dir / name, text.str());
    }
}

inline void install_wordcount(const std::filesystem::path& dir, const char* graph_id) {
    std::ostringstream g;
    g << graphml_header(graph_id);
    g << "    <data key=\"topicCfg\">topics.yaml</data>\n";
    g << "    <data key=\"seed\">1</data>\n";
    g << "    <data key=\"duration\">90</data>\n";
    g << "    <node id=\"p1\"><data key=\"prodType\">fileOfDirectory</data>"
         "<data key=\"prodCfg\">producer.yaml</data></node>\n";
    g << "    <node id=\"b1\"><data key=\"brokerCfg\">broker.yaml</data></node>\n";
    g << "    <node id=\"spe1\"><data key=\"streamProcType\">builtin</data>"
         "<data key=\"streamProcCfg\">spe1.yaml</data></node>\n";
    g << "    <node id=\"spe2\"><data key=\"streamProcType\">builtin</data>"
         "<data key=\"streamProcCfg\">spe2.yaml</data></node>\n";
    g << "    <node id=\"c1\"><data key=\"consType\">logger</data>"
         "<data key=\"consCfg\">consumer.yaml</data></node>\n";
    g << "    <node id=\"sw1\"/>\n";
    g << edge("p1", "sw1", 2, 100) << edge("b1", "sw1", 2, 100) << edge("spe1", "sw1", 2, 100)
      << edge("spe2", "sw1", 2, 100) << edge("c1", "sw1", 2, 100);
    g << "  </graph>\n</graphml>\n";
    write_file(dir / "experiment.graphml", g.str());
    write_file(dir / "topics.yaml",
               "raw-data: b1,1,zk\n"
               "avg-words-per-topic: b1,1,zk\n");
    write_file(dir / "producer.yaml",
               "mode: fileOfDirectory\n"
               "path: corpus\n"
               "rateKbps: 8\n"
               "topics: raw-data\n");
    // documents pace slower than the fetch wait; park fetches across the
    // whole gap so delivery cost is exactly one response leg
    write_file(dir / "broker.yaml", "fetchMaxWaitMs: 10000\n");
    write_file(dir / "spe1.yaml",
               "kind: splitWords\n"
               "inTopic: raw-data\n"
               "outTopic: avg-words-per-topic\n"
               "serviceTimeUs: 50\n");
    write_file(dir / "spe2.yaml",
               "kind: countByKey\n"
               "inTopic: avg-words-per-topic\n"
               "outTopic: sink\n"
               "serviceTimeUs: 20\n");
    write_file(dir / "consumer.yaml", "topics: avg-words-per-topic\n");
    write_corpus(dir / "corpus");
}

inline void install_partition(const std::filesystem::path& dir) {
    std::ostringstream g;
    g << graphml_header("partition");
    g << "    <data key=\"topicCfg\">topics.yaml</data>\n";
    g << "    <data key=\"faultCfg\">faults.yaml</data>\n";
    g << "    <data key=\"seed\">1</data>\n";
    g << "    <data key=\"duration\">600</data>\n";
    for (int i = 1; i <= 10; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "n%02d", i);
        g << "    <node id=\"" << id << "\">"
          << "<data key=\"brokerCfg\">broker.yaml</data>"
          << "<data key=\"prodType\">synthetic</data>"
          << "<data key=\"prodCfg\">producer.yaml</data>"
          << "<data key=\"consType\">logger</data>"
          << "<data key=\"consCfg\">consumer.yaml</data></node>\n";
    }
    g << "    <node id=\"sw1\"/>\n";
    for (int i = 1; i <= 10; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "n%02d", i);
        g << edge(id, "sw1", 2, 100);
    }
    g << "  </graph>\n</graphml>\n";
    write_file(dir / "experiment.graphml", g.str());
    write_file(dir / "topics.yaml",
               "topicA: n03,3,zk\n"
               "topicB: n07,3,zk\n");
    write_file(dir / "faults.yaml",
               "f1: linkDown,n03-sw1,240\n"
               "f2: linkUp,n03-sw1,360\n");
    write_file(dir / "broker.yaml", "# defaults\n");
    write_file(dir / "producer.yaml",
               "mode: synthetic\n"
               "rateKbps: 30\n"
               "recordSizeBytes: 750\n"
               "topics: topicA:1,topicB:1\n"
               "produceTimeoutMs: 150000\n");
    write_file(dir / "consumer.yaml", "topics: topicA,topicB\n");
}

inline void install_throughput(const std::filesystem::path& dir) {
    std::ostringstream g;
    g << graphml_header("throughput");
    g << "    <data key=\"topicCfg\">topics.yaml</data>\n";
    g << "    <data key=\"seed\">1</data>\n";
    g << "    <data key=\"duration\">600</data>\n";
    g << "    <node id=\"p1\"><data key=\"prodType\">synthetic</data>"
         "<data key=\"prodCfg\">producer.yaml</data></node>\n";
    g << "    <node id=\"b1\"><data key=\"brokerCfg\">broker.yaml</data></node>\n";
    g << "    <node id=\"c1\"><data key=\"consType\">logger</data>"
         "<data key=\"consCfg\">consumer.yaml</data></node>\n";
    g << "    <node id=\"sw1\"/>\n";
    g << edge("p1", "sw1", 2, 100) << edge("b1", "sw1", 2, 100) << edge("c1", "sw1", 2, 100);
    g << "  </graph>\n</graphml>\n";
    write_file(dir / "experiment.graphml", g.str());
    write_file(dir / "topics.yaml", "data: b1,1,zk\n");
    write_file(dir / "producer.yaml",
               "mode: synthetic\n"
               "rateKbps: 30\n"
               "recordSizeBytes: 750\n"
               "topics: data\n");
    // batch fetches so polling overhead stays well under the 5% rate budget
    write_file(dir / "broker.yaml",
               "fetchMinBytes: 3000\n"
               "fetchMaxWaitMs: 1000\n");
    write_file(dir / "consumer.yaml", "topics: data\n");
}

}  // namespace detail

inline bool known(const std::string& name) {
    for (const auto& [n, d] : list()) {
        if (n == name) return true;
    }
    return false;
}

/// Writes the named scenario's files into dir and returns the GraphML path.
inline std::filesystem::path install(const std::string& name,
                                     const std::filesystem::path& dir) {
    if (!known(name)) throw ValidationError("unknown scenario '" + name + "'");
    std::filesystem::create_directories(dir);
    if (name == "wordcount") detail::install_wordcount(dir, "wordcount");
    else if (name == "delaysweep") detail::install_wordcount(dir, "delaysweep");
    else if (name == "partition") detail::install_partition(dir);
    else if (name == "throughput") detail::install_throughput(dir);
    return dir / "experiment.graphml";
}

}  // namespace scenarios
}  // namespace streamforge
