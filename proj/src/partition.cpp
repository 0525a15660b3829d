#include "annihilator/partition.hpp"

#include <stdexcept>

namespace annihilator {

void Partition::validate() const {
    if (!(interval[0] < interval[1])) throw std::invalid_argument("Partition: empty interval");
    double prev = interval[0];
    for (double b : breakpoints) {
        if (!(prev < b)) throw std::invalid_argument("Partition: breakpoints not strictly increasing");
        prev = b;
    }
    if (!breakpoints.empty() && !(breakpoints.back() < interval[1]))
        throw std::invalid_argument("Partition: breakpoint at or past the right endpoint");
}

} // namespace annihilator
