#include "rmpflow/rng.hpp"

namespace rmpflow {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    key_ = splitmix64(seed);
    for (std::uint64_t s : stream) key_ = splitmix64(key_ ^ (s + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t CounterRng::next() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double CounterRng::uniform(double lo, double hi) {
    // 53 mantissa bits -> [0, 1).
    const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

}  // namespace rmpflow
