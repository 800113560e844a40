#include <iostream>
#include <string>
#include <vector>

#include "dscm/acceptance.hpp"

// Usage: acceptance [ID...]. Exit status 0 iff every selected criterion passes.
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));
    const auto results = dscm::acceptance::run(only, [](const dscm::acceptance::Result& r) {
        std::cout << dscm::acceptance::format(r) << std::endl;
    });
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.pass() ? 1 : 0;
    std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
    return passed == results.size() ? 0 : 1;
}
