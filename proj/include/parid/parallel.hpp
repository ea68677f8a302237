#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace parid {

/// Error raised from inside one replication, tagged with its index.
class ReplicationError : public std::runtime_error {
public:
    ReplicationError(std::uint64_t replication, const std::string& what)
        : std::runtime_error("replication " + std::to_string(replication) + ": " + what),
          replication_(replication) {}
    std::uint64_t replication() const noexcept { return replication_; }

private:
    std::uint64_t replication_;
};

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(r) for r in [0, reps) on up to `workers` threads and returns the
/// results in replication order, independent of scheduling. The first failing
/// replication (lowest index) is rethrown as a ReplicationError.
template <typename Result>
std::vector<Result> run_replications(std::uint64_t reps, unsigned workers,
                                     const std::function<Result(std::uint64_t)>& body) {
    std::vector<std::optional<Result>> slots(reps);
    std::vector<std::exception_ptr> errors(reps);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t r = next++; r < reps; r = next++) {
            try {
                slots[r].emplace(body(r));
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(reps, 1))));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    for (std::uint64_t r = 0; r < reps; ++r) {
        if (errors[r]) {
            try {
                std::rethrow_exception(errors[r]);
            } catch (const std::exception& e) {
                throw ReplicationError(r, e.what());
            } catch (...) {
                throw ReplicationError(r, "unknown error");
            }
        }
    }
    std::vector<Result> out;
    out.reserve(reps);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace parid
