#include "btf/parallel.hpp"

#include <cstdint>

namespace btf {

namespace {
constexpr std::size_t kLeaf = 16; // below this, sum serially

double pairwise_sum_rec(const double* a, std::size_t n) {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_rec(a, half) + pairwise_sum_rec(a + half, n - half);
}

double pairwise_dot_rec(const double* a, const double* b, std::size_t n) {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_dot_rec(a, b, half) + pairwise_dot_rec(a + half, b + half, n - half);
}
} // namespace

double pairwise_sum(const double* a, std::size_t n) { return pairwise_sum_rec(a, n); }

double pairwise_dot(const double* a, const double* b, std::size_t n) {
    return pairwise_dot_rec(a, b, n);
}

ThreadPool::ThreadPool(int workers) : n_workers_(workers < 1 ? 1 : workers) {
    // worker 0 is the calling thread; only spawn the extras
    for (int id = 1; id < n_workers_; ++id)
        threads_.emplace_back([this, id] { worker_loop(id); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
}

void ThreadPool::run_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t, int)>& body) {
    if (n == 0) return;
    const auto chunk = [&](int id) {
        const std::size_t per = n / static_cast<std::size_t>(n_workers_);
        const std::size_t rem = n % static_cast<std::size_t>(n_workers_);
        const std::size_t uid = static_cast<std::size_t>(id);
        const std::size_t begin = uid * per + (uid < rem ? uid : rem);
        const std::size_t end = begin + per + (uid < rem ? 1 : 0);
        if (begin < end) body(begin, end, id);
    };
    if (n_workers_ == 1) {
        chunk(0);
        return;
    }
    {
        std::lock_guard<std::mutex> lock(mu_);
        body_ = &body;
        job_n_ = n;
        pending_ = n_workers_ - 1;
        ++generation_;
    }
    cv_start_.notify_all();
    chunk(0); // the caller is worker 0
    std::unique_lock<std::mutex> lock(mu_);
    cv_done_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
}

void ThreadPool::worker_loop(int id) {
    std::uint64_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t, std::size_t, int)>* body;
        std::size_t n;
        {
            std::unique_lock<std::mutex> lock(mu_);
            cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            body = body_;
            n = job_n_;
        }
        const std::size_t per = n / static_cast<std::size_t>(n_workers_);
        const std::size_t rem = n % static_cast<std::size_t>(n_workers_);
        const std::size_t uid = static_cast<std::size_t>(id);
        const std::size_t begin = uid * per + (uid < rem ? uid : rem);
        const std::size_t end = begin + per + (uid < rem ? 1 : 0);
        if (begin < end) (*body)(begin, end, id);
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (--pending_ == 0) cv_done_.notify_one();
        }
    }
}

} // namespace btf
