#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "streamforge/sim_time.hpp"

namespace streamforge {

/// Identity of a produced message: (producing component, per-producer
/// sequence number). Unique per topic; retries reuse the same id.
struct RecordId {
    std::string producer;
    std::uint64_t seq = 0;

    auto operator<=>(const RecordId&) const = default;
    std::string str() const { return producer + "#" + std::to_string(seq); }
};

struct Record {
    std::string topic;
    std::string producer;
    std::uint64_t seq = 0;
    std::int64_t size_bytes = 0;
    SimTime produce_us = 0;
    std::string payload;  // empty for synthetic size-only blobs

    // Root record this one derives from; operators propagate it so pipeline
    // latency can be measured end to end.
    RecordId source;
    SimTime source_produce_us = 0;

    RecordId id() const { return {producer, seq}; }
};

struct LogEntry {
    Record rec;
    std::int64_t offset = 0;
};

}  // namespace streamforge
