#include <gtest/gtest.h>

#include "qkm/report.hpp"

using namespace qkm;

TEST(Report, BundleRoundTrip) {
    ReportBundle b;
    b.config = {{"q0", "1/2"}, {"seed", 11}};
    b.versions = {{"qkm", "0.1.0"}};
    b.add(CheckReport{"serre", "PASS", {{"checked", 12}}});
    b.add(CheckReport{"serre", "FAIL", {{"checked", 3}}});
    b.add(CheckReport{"commute-ideal", "INCONCLUSIVE", {}});
    b.timestamps = {{"seconds", 0.5}};
    ASSERT_EQ(b.checks.size(), 3u);
    EXPECT_EQ(b.checks[1].first, "serre#2");
    EXPECT_TRUE(b.any_fail());

    auto j = to_json(b);
    EXPECT_EQ(j["summary"]["pass"], 1);
    EXPECT_EQ(j["summary"]["fail"], 1);
    EXPECT_EQ(j["summary"]["inconclusive"], 1);
    auto back = bundle_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
}

TEST(Report, EmptyBundleIsValid) {
    ReportBundle b;
    auto j = to_json(b);
    EXPECT_TRUE(j["checks"].empty());
    EXPECT_EQ(j["summary"]["pass"], 0);
    auto back = bundle_from_json(j);
    EXPECT_TRUE(back.checks.empty());
    EXPECT_FALSE(back.any_fail());
}

TEST(Report, RejectsUnknownStatus) {
    nlohmann::json j = {{"check", "x"}, {"status", "MAYBE"}};
    EXPECT_THROW(report_from_json(j), std::invalid_argument);
    EXPECT_THROW(bundle_from_json(nlohmann::json::object()), nlohmann::json::exception);
}

TEST(Report, FailIfIsSticky) {
    CheckReport r{"x"};
    r.fail_if(false);
    EXPECT_TRUE(r.pass());
    r.fail_if(true);
    r.fail_if(false);
    EXPECT_EQ(r.status, "FAIL");
}
