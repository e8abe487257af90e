#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streamforge/record.hpp"

namespace streamforge {

// Modeled wire overhead. Frames carry their payload bytes plus this fixed
// per-frame constant; control messages have a small fixed body.
constexpr std::int64_t kFrameOverheadBytes = 16;
constexpr std::int64_t kControlBodyBytes = 32;

enum class ProduceStatus { Ok, NotLeader, Rejected, UnknownTopic };
enum class FetchStatus { Ok, NotLeader, OutOfRange };

struct TopicMeta {
    std::string topic;
    std::string leader;  // empty while a topic has no live leader
    std::uint64_t epoch = 0;
};

struct MsgProduce {
    std::string topic;
    std::vector<Record> records;
};
struct MsgProduceResp {
    std::string topic;
    ProduceStatus status = ProduceStatus::Ok;
    std::vector<std::pair<std::uint64_t, std::int64_t>> acked;  // (seq, offset)
};
struct MsgFetch {
    std::string topic;
    std::int64_t from_offset = 0;
    std::uint64_t req_id = 0;
};
struct MsgFetchResp {
    std::string topic;
    std::uint64_t req_id = 0;
    FetchStatus status = FetchStatus::Ok;
    std::int64_t from_offset = 0;
    std::vector<LogEntry> entries;
    std::int64_t hw = 0;
};
struct MsgReplicate {
    std::string topic;
    std::uint64_t epoch = 0;
    std::string leader;
    std::int64_t base_offset = 0;
    std::vector<Record> records;
    std::int64_t hw = 0;
};
struct MsgReplicateAck {
    std::string topic;
    std::uint64_t epoch = 0;
    std::string broker;
    std::int64_t acked_end = 0;
};
struct MsgHeartbeat {
    std::string broker;
};
struct MsgHeartbeatAck {};
struct MsgMetadataReq {};
struct MsgMetadata {
    std::vector<TopicMeta> entries;
};
struct MsgIsrUpdate {
    std::string topic;
    std::uint64_t epoch = 0;
    std::vector<std::string> isr;
};
struct MsgBecomeLeader {
    std::string topic;
    std::uint64_t epoch = 0;  // epoch the controller will enact
    std::vector<std::string> live_replicas;
};
struct MsgSyncQuery {
    std::string topic;
};
struct MsgSyncInfo {
    std::string topic;
    std::int64_t log_end = 0;
};
struct MsgSyncPull {
    std::string topic;
    std::int64_t from = 0;
};
struct MsgSyncData {
    std::string topic;
    std::int64_t from = 0;
    std::vector<LogEntry> entries;
};
struct MsgElectionReady {
    std::string topic;
    std::uint64_t epoch = 0;
};
struct MsgPrepareTransfer {
    std::string topic;
    std::uint64_t epoch = 0;
    std::string to;
};
struct MsgTransferReady {
    std::string topic;
    std::uint64_t epoch = 0;
};
struct MsgReconcile {
    std::string topic;
    std::string broker;
    std::vector<RecordId> ids;
};
struct MsgReconcileResp {
    std::string topic;
    std::int64_t prefix_len = 0;
    std::vector<LogEntry> entries;
    std::int64_t hw = 0;
};
struct MsgKvWrite {
    std::string key, value;
    RecordId source;
    std::int64_t size_bytes = 0;
    SimTime source_produce_us = 0;
};
struct MsgKvWriteAck {
    std::string key;
};
struct MsgKvRead {
    std::string key;
    std::uint64_t req_id = 0;
};
struct MsgKvReadResp {
    std::string key;
    std::optional<std::string> value;
    std::uint64_t req_id = 0;
};

using MessageBody =
    std::variant<MsgProduce, MsgProduceResp, MsgFetch, MsgFetchResp, MsgReplicate,
                 MsgReplicateAck, MsgHeartbeat, MsgHeartbeatAck, MsgMetadataReq, MsgMetadata,
                 MsgIsrUpdate, MsgBecomeLeader, MsgSyncQuery, MsgSyncInfo, MsgSyncPull,
                 MsgSyncData, MsgElectionReady, MsgPrepareTransfer, MsgTransferReady,
                 MsgReconcile, MsgReconcileResp, MsgKvWrite, MsgKvWriteAck, MsgKvRead,
                 MsgKvReadResp>;

struct Message {
    std::string from;  // component id
    std::string to;    // component id
    MessageBody body;
};

namespace detail {
inline std::int64_t records_bytes(const std::vector<Record>& rs) {
    std::int64_t total = 0;
    for (const auto& r : rs) total += r.size_bytes;
    return total;
}
inline std::int64_t entries_bytes(const std::vector<LogEntry>& es) {
    std::int64_t total = 0;
    for (const auto& e : es) total += e.rec.size_bytes;
    return total;
}
}  // namespace detail

/// Body size in bytes. Record-bearing messages carry exactly their payload
/// bytes (their header rides in the per-frame overhead); control messages
/// have a small fixed body.
inline std::int64_t body_bytes(const MessageBody& body) {
    return std::visit(
        [](const auto& m) -> std::int64_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MsgProduce>) {
                return detail::records_bytes(m.records);
            } else if constexpr (std::is_same_v<T, MsgReplicate>) {
                return detail::records_bytes(m.records);
            } else if constexpr (std::is_same_v<T, MsgFetchResp>) {
                return detail::entries_bytes(m.entries);
            } else if constexpr (std::is_same_v<T, MsgSyncData>) {
                return detail::entries_bytes(m.entries);
            } else if constexpr (std::is_same_v<T, MsgReconcileResp>) {
                return detail::entries_bytes(m.entries);
            } else if constexpr (std::is_same_v<T, MsgKvWrite>) {
                return m.size_bytes;
            } else {
                return kControlBodyBytes;
            }
        },
        body);
}

}  // namespace streamforge
