#pragma once

#include <cstdint>
#include <initializer_list>

namespace rmpflow {

// Counter-based generator (splitmix64 core). Draws are a pure function of
// (seed, stream key, counter), so adding streams or reordering calls in one
// stream never perturbs another: trial sets stay stable under method addition.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

    // Uniform draw in [lo, hi).
    double uniform(double lo, double hi);
    std::uint64_t next();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rmpflow
