#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twinwatch {

/// One timestamped plant sample. t_heater carries ground truth and is
/// only present in synthetic runs.
struct TelemetryRecord {
    double timestamp = 0.0;  // seconds, non-decreasing within a stream
    bool heater_on = false;
    double t_room = 0.0;
    double t_box = 0.0;
    std::optional<double> t_heater;
};

/// Thrown by read_csv with the offending line number in the message.
class TelemetryFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header: timestamp,heater_on,t_room,t_box[,t_heater]. heater_on is 0/1.
/// Validates finiteness and non-decreasing timestamps.
std::vector<TelemetryRecord> read_csv(std::istream& source);
std::vector<TelemetryRecord> read_csv_file(const std::string& path);

/// Numbers are written with enough digits for exact 64-bit round-trip.
/// The 5-column header is used when any record carries t_heater.
void write_csv(const std::vector<TelemetryRecord>& records, std::ostream& sink);
void write_csv_file(const std::vector<TelemetryRecord>& records, const std::string& path);

struct TransportMessage {
    std::string topic;
    std::string payload;  // JSON-serialized TelemetryRecord
    std::uint64_t sequence = 0;
};

/// Consumer contract: called sequentially, never concurrently, per
/// stream. Returning false aborts the replay.
using MessageConsumer = std::function<bool(const TransportMessage&)>;

struct ReplayPacing {
    bool instant = true;
    double realtime_factor = 1.0;  // timestamp deltas divided by this
};

struct ReplayResult {
    std::uint64_t delivered = 0;
    bool aborted = false;
};

/// In-process transport: delivers one message per record, in order, with
/// sequence numbers 1..n. Instant pacing ignores timestamps; scaled
/// pacing sleeps proportionally to timestamp deltas.
ReplayResult replay(const std::vector<TelemetryRecord>& records, const std::string& topic,
                    const MessageConsumer& consumer, const ReplayPacing& pacing);

std::string telemetry_record_to_json(const TelemetryRecord& r);
TelemetryRecord telemetry_record_from_json(const std::string& text);

}  // namespace twinwatch
