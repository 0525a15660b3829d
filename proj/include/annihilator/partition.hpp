#pragma once

#include <array>
#include <vector>

namespace annihilator {

/// Interior breakpoints of an alternating-sign partition of
/// [interval[0], interval[1]]. Breakpoints are strictly increasing and lie
/// strictly inside the open interval; an empty list is the trivial partition.
struct Partition {
    std::array<double, 2> interval{0.0, 1.0};
    std::vector<double> breakpoints;

    /// Throws std::invalid_argument on ordering violations.
    void validate() const;
};

} // namespace annihilator
