#pragma once

// Deterministic chunked Monte Carlo.
//
// A sample budget is cut into fixed-size chunks; chunk i draws from its own
// stream derive_seed(seed, i) and writes its partial sums to slot i. Slots are
// reduced in index order on the calling thread, so the result depends only on
// (seed, chunk size, budget) and never on how many workers processed chunks.

#include "bcl/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace bcl {

/// Worker count from BCL_WORKERS (default: hardware concurrency). Never affects results.
std::size_t worker_count();

/// Overrides BCL_WORKERS for the current process; 0 restores the environment value.
void set_worker_count(std::size_t workers);

namespace detail {
bool& inside_parallel_region();
}

/// Runs body(i) for i in [0, count). Nested calls run inline.
template <typename Body>
void parallel_for(std::size_t count, Body&& body)
{
    const std::size_t workers = std::min(worker_count(), count);
    if (workers <= 1 || detail::inside_parallel_region()) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        detail::inside_parallel_region() = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                break;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
        detail::inside_parallel_region() = false;
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            pool.emplace_back(run);
        }
        run();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct McSettings {
    std::size_t samples = 4096;
    std::uint64_t seed = 1;
    std::size_t chunk = 512;
};

/// Per-output mean and standard error of a stratified estimate.
struct McVector {
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<double> cov;  // covariance of the means, row-major outputs x outputs; empty unless requested
    std::size_t samples = 0;

    double covariance(std::size_t i, std::size_t j) const
    {
        const std::size_t m = mean.size();
        return cov.empty() ? (i == j ? se[i] * se[i] : 0.0) : cov[i * m + j];
    }
};

/// Stratified Monte Carlo with `outputs` integrands evaluated on shared samples.
///
/// Sample k (global index) belongs to stratum k % strata; the estimate is the
/// equal-weight combination of the per-stratum means. `sample(rng, stratum, out)`
/// must fill `out` (size `outputs`).
template <typename Sampler>
McVector stratified_means(const McSettings& settings, std::size_t strata, std::size_t outputs, Sampler&& sample,
                          bool with_covariance = false)
{
    strata = std::max<std::size_t>(strata, 1);
    const std::size_t chunk = std::max<std::size_t>(settings.chunk, 1);
    const std::size_t budget = std::max(settings.samples, strata);
    const std::size_t chunks = (budget + chunk - 1) / chunk;

    // Layout per chunk: [stratum][output] sums and [stratum][output][output] cross sums
    // (only the diagonal without covariance), plus per-stratum counts.
    const std::size_t cell = strata * outputs;
    const std::size_t width = with_covariance ? outputs : 1;
    const std::size_t cross = cell * width;
    std::vector<double> sums(chunks * cell, 0.0);
    std::vector<double> squares(chunks * cross, 0.0);
    std::vector<std::size_t> counts(chunks * strata, 0);

    parallel_for(chunks, [&](std::size_t c) {
        Rng rng(derive_seed(settings.seed, c));
        std::vector<double> out(outputs, 0.0);
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(budget, begin + chunk);
        double* s = sums.data() + c * cell;
        double* q = squares.data() + c * cross;
        std::size_t* n = counts.data() + c * strata;
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t st = k % strata;
            std::fill(out.begin(), out.end(), 0.0);
            sample(rng, st, std::span<double>(out));
            for (std::size_t o = 0; o < outputs; ++o) {
                s[st * outputs + o] += out[o];
                if (with_covariance) {
                    for (std::size_t p = 0; p < outputs; ++p) {
                        q[(st * outputs + o) * outputs + p] += out[o] * out[p];
                    }
                } else {
                    q[st * outputs + o] += out[o] * out[o];
                }
            }
            ++n[st];
        }
    });

    McVector result;
    result.mean.assign(outputs, 0.0);
    result.se.assign(outputs, 0.0);
    result.samples = budget;
    std::vector<double> total_sum(cell, 0.0);
    std::vector<double> total_sq(cross, 0.0);
    std::vector<std::size_t> total_n(strata, 0);
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t i = 0; i < cell; ++i) {
            total_sum[i] += sums[c * cell + i];
        }
        for (std::size_t i = 0; i < cross; ++i) {
            total_sq[i] += squares[c * cross + i];
        }
        for (std::size_t st = 0; st < strata; ++st) {
            total_n[st] += counts[c * strata + st];
        }
    }
    const double w = 1.0 / static_cast<double>(strata);
    auto second = [&](std::size_t st, std::size_t o, std::size_t p) {
        return with_covariance ? total_sq[(st * outputs + o) * outputs + p] : total_sq[st * outputs + o];
    };
    if (with_covariance) {
        result.cov.assign(outputs * outputs, 0.0);
    }
    for (std::size_t o = 0; o < outputs; ++o) {
        for (std::size_t st = 0; st < strata; ++st) {
            result.mean[o] += w * total_sum[st * outputs + o] / static_cast<double>(total_n[st]);
        }
        for (std::size_t p = with_covariance ? 0 : o; p < (with_covariance ? outputs : o + 1); ++p) {
            double var = 0.0;
            for (std::size_t st = 0; st < strata; ++st) {
                const double n = static_cast<double>(total_n[st]);
                const double mo = total_sum[st * outputs + o] / n;
                const double mp = total_sum[st * outputs + p] / n;
                const double v = n > 1 ? (second(st, o, p) / n - mo * mp) * n / (n - 1) : 0.0;
                var += w * w * v / n;
            }
            if (with_covariance) {
                result.cov[o * outputs + p] = var;
            }
            if (p == o) {
                result.se[o] = std::sqrt(std::max(0.0, var));
            }
        }
    }
    return result;
}

}  // namespace bcl
