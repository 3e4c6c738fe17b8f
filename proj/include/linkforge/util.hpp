#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace linkforge {

// ─── Randomness ──────────────────────────────────────────────────────────────

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a named sub-stream ("generation", "training", "sampling", ...).
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(seed ^ splitmix64(h));
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
inline double uniform01(Rng& rng) noexcept { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n) by rejection; platform independent.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

// ─── Logging ─────────────────────────────────────────────────────────────────

inline void log_warning(const std::string& msg) {
    static std::mutex m;
    std::lock_guard lock(m);
    std::cerr << "warning: " << msg << '\n';
}

// ─── Parallel loops ──────────────────────────────────────────────────────────

/// Default worker count: LINKFORGE_JOBS if set, else 1.
inline unsigned default_jobs() {
    if (const char* env = std::getenv("LINKFORGE_JOBS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Work is handed out in
/// index order; callers write results into per-index slots so the output does
/// not depend on the schedule. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex m;
    std::size_t next = 0;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= n || error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace linkforge
