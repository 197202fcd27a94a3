#include "spdelab/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spdelab {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> blocked_sum(std::size_t count, std::size_t slots, int threads,
                                const std::function<void(std::size_t, std::vector<double>&)>& fn,
                                std::size_t block_size) {
    if (block_size == 0) block_size = 1;
    const std::size_t blocks = (count + block_size - 1) / block_size;
    std::vector<std::vector<double>> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::vector<double> acc(slots, 0.0);
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(count, begin + block_size);
        for (std::size_t i = begin; i < end; ++i) fn(i, acc);
        partial[b] = std::move(acc);
    });
    std::vector<double> total(slots, 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t s = 0; s < slots; ++s) total[s] += partial[b][s];
    return total;
}

MeanVar blocked_mean_var(std::size_t count, std::size_t slots, int threads,
                         const std::function<void(std::size_t, std::vector<double>&)>& fn,
                         std::size_t block_size) {
    if (block_size == 0) block_size = 1;
    const std::size_t blocks = (count + block_size - 1) / block_size;
    struct Block {
        std::size_t n = 0;
        std::vector<double> mean, m2;
    };
    std::vector<Block> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Block acc;
        acc.mean.assign(slots, 0.0);
        acc.m2.assign(slots, 0.0);
        std::vector<double> values(slots);
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(count, begin + block_size);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(values.begin(), values.end(), 0.0);
            fn(i, values);
            ++acc.n;
            for (std::size_t s = 0; s < slots; ++s) {
                const double delta = values[s] - acc.mean[s];
                acc.mean[s] += delta / static_cast<double>(acc.n);
                acc.m2[s] += delta * (values[s] - acc.mean[s]);
            }
        }
        partial[b] = std::move(acc);
    });

    Block total;
    total.mean.assign(slots, 0.0);
    total.m2.assign(slots, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const Block& q = partial[b];
        if (q.n == 0) continue;
        if (total.n == 0) {
            total = q;
            continue;
        }
        const std::size_t merged = total.n + q.n;
        for (std::size_t s = 0; s < slots; ++s) {
            const double delta = q.mean[s] - total.mean[s];
            total.mean[s] += delta * static_cast<double>(q.n) / static_cast<double>(merged);
            total.m2[s] += q.m2[s] + delta * delta * static_cast<double>(total.n) *
                                         static_cast<double>(q.n) / static_cast<double>(merged);
        }
        total.n = merged;
    }

    MeanVar out;
    out.count = total.n;
    out.mean = std::move(total.mean);
    out.sample_var.assign(slots, 0.0);
    if (total.n >= 2)
        for (std::size_t s = 0; s < slots; ++s)
            out.sample_var[s] = total.m2[s] / static_cast<double>(total.n - 1);
    return out;
}

}  // namespace spdelab
