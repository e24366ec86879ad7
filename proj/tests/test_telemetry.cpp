#include <doctest.h>

#include <random>
#include <sstream>

#include "twinwatch/telemetry.hpp"

using namespace twinwatch;

namespace {

std::vector<TelemetryRecord> random_records(std::mt19937_64& rng, int n, bool with_heater) {
    std::uniform_real_distribution<double> unif(-100.0, 100.0);
    std::vector<TelemetryRecord> out;
    double ts = 0.0;
    for (int i = 0; i < n; ++i) {
        TelemetryRecord r;
        ts += std::abs(unif(rng));
        r.timestamp = ts;
        r.heater_on = (rng() & 1) != 0;
        r.t_room = unif(rng);
        r.t_box = unif(rng);
        if (with_heater) r.t_heater = unif(rng);
        out.push_back(r);
    }
    return out;
}

std::vector<TelemetryRecord> roundtrip(const std::vector<TelemetryRecord>& records) {
    std::stringstream ss;
    write_csv(records, ss);
    return read_csv(ss);
}

}  // namespace

TEST_CASE("read_csv basics") {
    SUBCASE("header-only file gives an empty list") {
        std::stringstream ss("timestamp,heater_on,t_room,t_box\n");
        CHECK(read_csv(ss).empty());
    }
    SUBCASE("single four-column row") {
        std::stringstream ss("timestamp,heater_on,t_room,t_box\n3.0,1,21.0,25.5\n");
        const auto recs = read_csv(ss);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].timestamp == 3.0);
        CHECK(recs[0].heater_on);
        CHECK(recs[0].t_room == 21.0);
        CHECK(recs[0].t_box == 25.5);
        CHECK(!recs[0].t_heater);
    }
    SUBCASE("malformed row reports the line number") {
        std::stringstream ss("timestamp,heater_on,t_room,t_box\n1.0,1,21.0,25.5\n2.0,1,oops,25.5\n");
        CHECK_THROWS_WITH_AS(read_csv(ss), doctest::Contains("line 3"), TelemetryFormatError);
    }
    SUBCASE("decreasing timestamps rejected") {
        std::stringstream ss("timestamp,heater_on,t_room,t_box\n5.0,0,21,25\n4.0,0,21,25\n");
        CHECK_THROWS_WITH_AS(read_csv(ss), doctest::Contains("decreasing"), TelemetryFormatError);
    }
    SUBCASE("missing required column rejected") {
        std::stringstream ss("timestamp,heater_on,t_room\n");
        CHECK_THROWS_AS(read_csv(ss), TelemetryFormatError);
        std::stringstream bad_flag("timestamp,heater_on,t_room,t_box\n1.0,2,21,25\n");
        CHECK_THROWS_WITH_AS(read_csv(bad_flag), doctest::Contains("heater_on"),
                             TelemetryFormatError);
    }
}

TEST_CASE("write_csv schema rule") {
    SUBCASE("empty list writes the header only") {
        std::stringstream ss;
        write_csv({}, ss);
        CHECK(ss.str() == "timestamp,heater_on,t_room,t_box\n");
    }
    SUBCASE("any t_heater forces the 5-column header") {
        std::mt19937_64 rng(1);
        auto recs = random_records(rng, 3, false);
        recs[1].t_heater = 33.0;
        std::stringstream ss;
        write_csv(recs, ss);
        CHECK(ss.str().rfind("timestamp,heater_on,t_room,t_box,t_heater\n", 0) == 0);
    }
}

TEST_CASE("CSV round-trip identity on random records") {
    std::mt19937_64 rng(1234);
    for (bool with_heater : {false, true}) {
        const auto records = random_records(rng, 1000, with_heater);
        const auto back = roundtrip(records);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(back[i].timestamp == records[i].timestamp);
            CHECK(back[i].heater_on == records[i].heater_on);
            CHECK(back[i].t_room == records[i].t_room);
            CHECK(back[i].t_box == records[i].t_box);
            CHECK(back[i].t_heater == records[i].t_heater);
        }
    }
}

TEST_CASE("replay") {
    std::mt19937_64 rng(9);
    const auto records = random_records(rng, 25, true);
    SUBCASE("instant pacing delivers everything in order with dense sequences") {
        std::vector<TransportMessage> got;
        const auto res = replay(records, "incubator.telemetry",
                                [&](const TransportMessage& m) {
                                    got.push_back(m);
                                    return true;
                                },
                                ReplayPacing{});
        CHECK(!res.aborted);
        CHECK(res.delivered == records.size());
        REQUIRE(got.size() == records.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].sequence == i + 1);
            CHECK(got[i].topic == "incubator.telemetry");
            const auto r = telemetry_record_from_json(got[i].payload);
            CHECK(r.timestamp == records[i].timestamp);
            CHECK(r.t_box == records[i].t_box);
        }
    }
    SUBCASE("consumer failure aborts with the delivered count") {
        std::uint64_t seen = 0;
        const auto res = replay(records, "t",
                                [&](const TransportMessage& m) {
                                    seen = m.sequence;
                                    return m.sequence < 10;
                                },
                                ReplayPacing{});
        CHECK(res.aborted);
        CHECK(res.delivered == 9);
        CHECK(seen == 10);
    }
}

TEST_CASE("telemetry record JSON round-trip") {
    TelemetryRecord r{12.5, true, 21.0, 34.75, 55.125};
    const auto back = telemetry_record_from_json(telemetry_record_to_json(r));
    CHECK(back.timestamp == r.timestamp);
    CHECK(back.heater_on == r.heater_on);
    CHECK(back.t_heater == r.t_heater);
    TelemetryRecord no_truth{1.0, false, 21.0, 25.0, std::nullopt};
    CHECK(!telemetry_record_from_json(telemetry_record_to_json(no_truth)).t_heater);
}
