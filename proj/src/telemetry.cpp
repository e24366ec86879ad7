#include "twinwatch/telemetry.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace twinwatch {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
        throw TelemetryFormatError("telemetry CSV line " + std::to_string(line_no) +
                                   ": bad numeric field '" + field + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

std::vector<TelemetryRecord> read_csv(std::istream& source) {
    std::string line;
    if (!std::getline(source, line))
        throw TelemetryFormatError("telemetry CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool with_heater;
    if (line == "timestamp,heater_on,t_room,t_box")
        with_heater = false;
    else if (line == "timestamp,heater_on,t_room,t_box,t_heater")
        with_heater = true;
    else
        throw TelemetryFormatError("telemetry CSV line 1: unrecognized header '" + line + "'");

    std::vector<TelemetryRecord> records;
    std::size_t line_no = 1;
    double prev_ts = -std::numeric_limits<double>::infinity();
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        const std::size_t expected = with_heater ? 5u : 4u;
        if (fields.size() != expected)
            throw TelemetryFormatError("telemetry CSV line " + std::to_string(line_no) +
                                       ": expected " + std::to_string(expected) + " fields, got " +
                                       std::to_string(fields.size()));
        TelemetryRecord r;
        r.timestamp = parse_double(fields[0], line_no);
        if (fields[1] == "0")
            r.heater_on = false;
        else if (fields[1] == "1")
            r.heater_on = true;
        else
            throw TelemetryFormatError("telemetry CSV line " + std::to_string(line_no) +
                                       ": heater_on must be 0 or 1");
        r.t_room = parse_double(fields[2], line_no);
        r.t_box = parse_double(fields[3], line_no);
        if (with_heater) r.t_heater = parse_double(fields[4], line_no);
        if (r.timestamp < prev_ts)
            throw TelemetryFormatError("telemetry CSV line " + std::to_string(line_no) +
                                       ": decreasing timestamp");
        prev_ts = r.timestamp;
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TelemetryRecord> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TelemetryFormatError("cannot open telemetry file: " + path);
    return read_csv(in);
}

void write_csv(const std::vector<TelemetryRecord>& records, std::ostream& sink) {
    bool with_heater = false;
    for (const auto& r : records)
        if (r.t_heater) with_heater = true;
    sink << "timestamp,heater_on,t_room,t_box" << (with_heater ? ",t_heater" : "") << "\n";
    for (const auto& r : records) {
        sink << format_double(r.timestamp) << ',' << (r.heater_on ? '1' : '0') << ','
             << format_double(r.t_room) << ',' << format_double(r.t_box);
        if (with_heater) sink << ',' << format_double(r.t_heater.value_or(0.0));
        sink << '\n';
    }
}

void write_csv_file(const std::vector<TelemetryRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_csv(records, out);
    if (!out) throw std::runtime_error("write failure on: " + path);
}

ReplayResult replay(const std::vector<TelemetryRecord>& records, const std::string& topic,
                    const MessageConsumer& consumer, const ReplayPacing& pacing) {
    ReplayResult result;
    double prev_ts = records.empty() ? 0.0 : records.front().timestamp;
    std::uint64_t seq = 0;
    for (const auto& r : records) {
        if (!pacing.instant && pacing.realtime_factor > 0.0) {
            const double delay = (r.timestamp - prev_ts) / pacing.realtime_factor;
            if (delay > 0.0)
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        prev_ts = r.timestamp;
        TransportMessage msg{topic, telemetry_record_to_json(r), ++seq};
        if (!consumer(msg)) {
            result.aborted = true;
            return result;
        }
        result.delivered = seq;
    }
    return result;
}

std::string telemetry_record_to_json(const TelemetryRecord& r) {
    nlohmann::json j;
    j["timestamp"] = r.timestamp;
    j["heater_on"] = r.heater_on;
    j["t_room"] = r.t_room;
    j["t_box"] = r.t_box;
    if (r.t_heater) j["t_heater"] = *r.t_heater;
    return j.dump();
}

TelemetryRecord telemetry_record_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    TelemetryRecord r;
    r.timestamp = j.at("timestamp").get<double>();
    r.heater_on = j.at("heater_on").get<bool>();
    r.t_room = j.at("t_room").get<double>();
    r.t_box = j.at("t_box").get<double>();
    if (j.contains("t_heater")) r.t_heater = j["t_heater"].get<double>();
    return r;
}

}  // namespace twinwatch
