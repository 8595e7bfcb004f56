#include "qkm/suite.hpp"

#include <cstdio>

int main() {
    qkm::SuiteConfig cfg;
    int failed = 0;
    auto results = qkm::run_acceptance(cfg, [&](const qkm::Criterion& c) {
        if (!c.report.pass()) ++failed;
        std::printf("%s [%2d] %-15s %.2fs\n", c.report.pass() ? "PASS" : "FAIL", c.id, c.name.c_str(), c.seconds);
        if (!c.report.pass()) std::printf("      %s\n", c.report.witness.dump().substr(0, 2000).c_str());
        std::fflush(stdout);
    });
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
