#include "bcl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace bcl {

namespace {
std::atomic<std::size_t> g_override{0};

std::size_t environment_workers()
{
    if (const char* env = std::getenv("BCL_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<std::size_t>(v);
            }
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}
}  // namespace

std::size_t worker_count()
{
    const std::size_t o = g_override.load();
    return o > 0 ? o : environment_workers();
}

void set_worker_count(std::size_t workers) { g_override.store(workers); }

namespace detail {
bool& inside_parallel_region()
{
    thread_local bool inside = false;
    return inside;
}
}  // namespace detail

}  // namespace bcl
