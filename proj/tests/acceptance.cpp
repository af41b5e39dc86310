#include <cstdio>

#include "tmsdyn/validation.hpp"

int main() {
    const tmsdyn::AcceptanceReport report = tmsdyn::run_acceptance();
    std::fputs(tmsdyn::format_report(report).c_str(), stdout);
    return report.all_passed() ? 0 : 1;
}
