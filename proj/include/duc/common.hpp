#pragma once

#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace duc {

// Base class for all library errors; the C API maps subclasses to status codes.
class Error : public std::runtime_error {
 public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
 public:
    using Error::Error;
};

// Carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
    ValidationError(const std::string& msg, std::vector<std::string> violations)
        : Error(msg), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

 private:
    std::vector<std::string> violations_;
};

class DimensionError : public Error {
 public:
    using Error::Error;
};

class SolverError : public Error {
 public:
    using Error::Error;
};

class IoError : public Error {
 public:
    using Error::Error;
};

namespace util {

// Shortest round-trip decimal rendering; used everywhere a double is
// serialized so repeated runs emit identical bytes.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// splitmix64; used to derive independent child seeds from a run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0,1) from a raw 64-bit draw; avoids the
// implementation-defined behavior of std::uniform_real_distribution.
inline double to_unit_interval(std::uint64_t raw) {
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

// Number of worker threads for Block-2 solves. DUC_THREADS caps it.
inline unsigned block2_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("DUC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

// Runs fn(i) for i in [0, n). Each index writes only its own output slot,
// so the result is identical for any thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = std::min<std::size_t>(block2_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace util
}  // namespace duc
