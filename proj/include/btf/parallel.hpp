#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace btf {

// Fixed-order pairwise (cascade) summation.  The reduction tree depends only
// on n, never on how work is scheduled, so multi-threaded runs that feed the
// same array in produce bit-identical totals.
double pairwise_sum(const double* a, std::size_t n);

// Pairwise reduction of the elementwise product a[i]*b[i] (no intermediate
// buffer; same fixed tree as pairwise_sum).
double pairwise_dot(const double* a, const double* b, std::size_t n);

// A tiny long-lived worker pool.  run_chunks splits [0,n) into contiguous
// chunks, one per worker (the body also receives its worker id for scratch
// buffers), and blocks until all are done.  Correctness must never depend on
// the chunking: callers write disjoint ranges and do their reductions with
// the fixed-order helpers above.
class ThreadPool {
public:
    explicit ThreadPool(int workers);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int workers() const { return n_workers_; }

    void run_chunks(std::size_t n,
                    const std::function<void(std::size_t, std::size_t, int)>& body);

private:
    void worker_loop(int id);

    int n_workers_;
    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_start_, cv_done_;
    const std::function<void(std::size_t, std::size_t, int)>* body_ = nullptr;
    std::size_t job_n_ = 0;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

} // namespace btf
