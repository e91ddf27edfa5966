#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "prion/config.hpp"
#include "prion/io.hpp"

using namespace prion;

namespace {

bool mentions(const std::vector<std::string>& errors, const std::string& text) {
    return std::any_of(errors.begin(), errors.end(),
                       [&](const std::string& e) { return e.find(text) != std::string::npos; });
}

std::vector<std::string> errors_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

}  // namespace

TEST(ParseConfig, MinimalClosedFamily) {
    const auto c = parse_config(R"({"rates": {"B": 0.5, "M": 0.25, "S": 2, "eta": 0.75, "nu": 1}})");
    const auto r = make_rates(c);
    const auto ref = make_power_law_rates({0.5, 1.0, 0.25, 0.0, 2.0, 0.0, 0.75}, {1.0, 1.0, 1.0, 1.0});
    ASSERT_TRUE(r.power_law && ref.power_law);
    EXPECT_EQ(r.power_law->B, ref.power_law->B);
    EXPECT_EQ(r.power_law->S, ref.power_law->S);
    EXPECT_EQ(r.power_law->eta_const, ref.power_law->eta_const);
    EXPECT_EQ(r.nu, ref.nu);
    EXPECT_EQ(r.lambda, ref.lambda);
    for (double y : {1.0, 2.5, 40.0}) {
        EXPECT_EQ(r.beta(y), ref.beta(y));
        EXPECT_EQ(r.mu(y), ref.mu(y));
        EXPECT_EQ(r.tau(y), ref.tau(y));
        EXPECT_EQ(r.eta(y, 2.0 * y), ref.eta(y, 2.0 * y));
    }
    EXPECT_TRUE(has_closed_moments(r));
}

TEST(ParseConfig, EmptyObjectGivesDefaults) { EXPECT_EQ(parse_config("{}"), RunConfig{}); }

TEST(ParseConfig, ExponentBoundInMessage) {
    const auto errors = errors_of(R"({"rates": {"b": 2.5}})");
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_TRUE(mentions(errors, "b = 2.5"));
    EXPECT_TRUE(mentions(errors, "b <= 2"));
}

TEST(ParseConfig, DuplicateKeysAllListed) {
    const auto errors = errors_of(R"({"rates": {"B": 1, "B": 2, "m": 3}, "v0": 1, "v0": 2})");
    EXPECT_TRUE(mentions(errors, "duplicate key 'rates.B'"));
    EXPECT_TRUE(mentions(errors, "duplicate key 'v0'"));
    EXPECT_TRUE(mentions(errors, "m = 3"));
}

TEST(ParseConfig, AllErrorsReported) {
    const auto errors = errors_of(R"({
        "rates": {"b": -1, "theta": 2, "M": -0.5, "k0": "triangle"},
        "grid": {"ymax": 1.5, "cells": 1, "mode": "random"},
        "time": {"T": 0, "dt": "small", "scheme": "leapfrog", "cfl": 3},
        "v0": -2
    })");
    for (const char* needle : {"b = -1", "theta = 2", "coefficient M", "rates.k0", "grid.ymax", "grid.cells",
                               "grid.mode", "time.T", "time.dt", "time.scheme", "time.cfl", "v0"})
        EXPECT_TRUE(mentions(errors, needle)) << needle;
    EXPECT_GE(errors.size(), 12u);
}

TEST(ParseConfig, UnknownKeysRejected) {
    const auto errors = errors_of(R"({"rate": {}, "grid": {"cell": 10}, "diagnostics": {"bump": {"centre": 3}}})");
    EXPECT_TRUE(mentions(errors, "unknown key 'rate'"));
    EXPECT_TRUE(mentions(errors, "unknown key 'grid.cell'"));
    EXPECT_TRUE(mentions(errors, "unknown key 'diagnostics.bump.centre'"));
}

TEST(ParseConfig, TypeErrors) {
    const auto errors = errors_of(R"({"grid": {"cells": 2.5}, "diagnostics": {"ladder": [100, "x"], "snapshots": 1}, "time": []})");
    EXPECT_TRUE(mentions(errors, "'grid.cells' must be a nonnegative integer"));
    EXPECT_TRUE(mentions(errors, "'diagnostics.ladder' entries"));
    EXPECT_TRUE(mentions(errors, "'diagnostics.snapshots' must be true or false"));
    EXPECT_TRUE(mentions(errors, "'time' must be an object"));
}

TEST(ParseConfig, MalformedJson) {
    const auto errors = errors_of(R"({"rates": )");
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_TRUE(mentions(errors, "malformed JSON"));
}

TEST(ParseConfig, RoundTrip) {
    RunConfig c;
    c.rates.b = 1.5;
    c.rates.k0 = "parabolic";
    c.grid.mode = GridMode::geometric;
    c.grid.cells = 123;
    c.v0 = 0.1 + 0.2;
    c.initial.type = "indicator";
    c.initial.lo = 2.0;
    c.initial.hi = 3.0 + 1e-15;
    c.time.cfl = 0.3;
    c.time.scheme = Scheme::euler;
    c.diagnostics.moment_orders = {0.5, 2.0, 1.0 / 3.0};
    c.diagnostics.ladder = {10, 20};
    c.diagnostics.snapshots = true;
    const auto back = parse_config(to_json(c).dump());
    EXPECT_EQ(back, c);
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    // a null cfl switches back to the fixed step
    auto j = to_json(c);
    j["time"]["cfl"] = nullptr;
    EXPECT_FALSE(parse_config(j.dump()).time.cfl);
}

TEST(ParseConfig, RelativePathsResolvedAgainstConfigDirectory) {
    const auto dir = std::filesystem::temp_directory_path() / "prion_config_paths";
    std::filesystem::create_directories(dir / "data");
    {
        std::ofstream(dir / "data" / "k0.txt") << "0 1\n1 1\n";
        std::ofstream(dir / "data" / "u0.txt") << "1 0\n3 1\n5 0\n";
        std::ofstream(dir / "run.json") << R"({"rates": {"k0": "table", "k0_table": "data/k0.txt"},
                                               "initial": {"type": "table", "table": "data/u0.txt"}})";
    }
    const auto c = load_config(dir / "run.json");
    EXPECT_EQ(c.rates.k0_table, (dir / "data" / "k0.txt").lexically_normal().string());
    EXPECT_EQ(c.initial.table, (dir / "data" / "u0.txt").lexically_normal().string());
    const auto r = make_rates(c);
    EXPECT_NEAR(r.k0(0.3), 1.0, 1e-15);
    const auto u = make_initial_profile(c.initial);
    EXPECT_NEAR(u.value(2.0), 0.5, 1e-15);
    const auto abs = parse_config(R"({"initial": {"type": "table", "table": "/tmp/x.txt"}})", dir);
    EXPECT_EQ(abs.initial.table, "/tmp/x.txt");
    std::filesystem::remove_all(dir);
}

TEST(ConfigHash, ChangesIffConfigChanges) {
    const RunConfig base;
    const auto h = config_hash(base);
    EXPECT_EQ(h.size(), 64u);
    EXPECT_EQ(config_hash(RunConfig{}), h);
    EXPECT_EQ(config_hash(parse_config(to_json(base).dump())), h);
    std::vector<RunConfig> variants(8, base);
    variants[0].rates.nu = 1e-12;
    variants[1].grid.cells += 1;
    variants[2].v0 = std::nextafter(base.v0, 3.0);
    variants[3].time.cfl = 0.5;
    variants[4].diagnostics.moment_orders = {2.0};
    variants[5].diagnostics.bump.center = 4.5;
    variants[6].initial.table = "x";
    variants[7].rates.k0 = "parabolic";
    std::set<std::string> seen{h};
    for (const auto& v : variants) EXPECT_TRUE(seen.insert(config_hash(v)).second);
}

TEST(ConfigHash, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(MakeSetup, FollowsConfig) {
    RunConfig c;
    c.grid.cells = 50;
    c.time.T = 2.0;
    const auto s = make_setup(c);
    EXPECT_EQ(s.grid.size(), 50u);
    EXPECT_EQ(s.u0.size(), 50u);
    EXPECT_EQ(s.v0, 2.0);
    EXPECT_EQ(s.T, 2.0);
    EXPECT_GT(*std::max_element(s.u0.begin(), s.u0.end()), 0.5);
}
