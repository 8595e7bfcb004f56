#pragma once

#include <json.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkm {

struct CheckReport {
    std::string check;
    std::string status = "PASS";  // PASS, FAIL or INCONCLUSIVE
    nlohmann::json witness = nlohmann::json::object();

    bool pass() const { return status == "PASS"; }
    void fail_if(bool bad) {
        if (bad) status = "FAIL";
    }
};

inline nlohmann::json to_json(const CheckReport& r) { return {{"check", r.check}, {"status", r.status}, {"witness", r.witness}}; }

inline CheckReport report_from_json(const nlohmann::json& j) {
    CheckReport r;
    r.check = j.at("check").get<std::string>();
    r.status = j.at("status").get<std::string>();
    if (r.status != "PASS" && r.status != "FAIL" && r.status != "INCONCLUSIVE") throw std::invalid_argument("unknown report status " + r.status);
    r.witness = j.value("witness", nlohmann::json::object());
    return r;
}

// Reports keyed by check name (repeated names get a #n suffix). Everything that varies between
// identical runs lives under "timestamps".
struct ReportBundle {
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json versions = nlohmann::json::object();
    std::vector<std::pair<std::string, CheckReport>> checks;
    nlohmann::json timestamps = nlohmann::json::object();

    void add(const CheckReport& r) {
        std::string key = r.check;
        for (int n = 2; std::any_of(checks.begin(), checks.end(), [&](const auto& c) { return c.first == key; }); ++n)
            key = r.check + "#" + std::to_string(n);
        checks.emplace_back(key, r);
    }
    bool any_fail() const {
        return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.second.status == "FAIL"; });
    }
};

inline nlohmann::json to_json(const ReportBundle& b) {
    nlohmann::json checks = nlohmann::json::object();
    std::size_t pass = 0, fail = 0, inconclusive = 0;
    for (const auto& [k, r] : b.checks) {
        checks[k] = to_json(r);
        (r.status == "PASS" ? pass : r.status == "FAIL" ? fail : inconclusive) += 1;
    }
    return {{"config", b.config},
            {"versions", b.versions},
            {"checks", checks},
            {"summary", {{"pass", pass}, {"fail", fail}, {"inconclusive", inconclusive}}},
            {"timestamps", b.timestamps}};
}

inline ReportBundle bundle_from_json(const nlohmann::json& j) {
    ReportBundle b;
    b.config = j.value("config", nlohmann::json::object());
    b.versions = j.value("versions", nlohmann::json::object());
    b.timestamps = j.value("timestamps", nlohmann::json::object());
    for (const auto& [k, v] : j.at("checks").items()) b.checks.emplace_back(k, report_from_json(v));
    return b;
}

}  // namespace qkm
