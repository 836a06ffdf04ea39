#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pdn {

/// Persistent worker pool with static range partitioning.
///
/// Work is always split into one contiguous chunk per worker, so any
/// reduction that sums per-chunk buffers in chunk order is bitwise
/// reproducible for a fixed worker count. Callers that need bitwise
/// identity across *different* worker counts must make per-item output
/// independent of the partition (see the two-phase assembly in fem.cpp).
class ThreadPool {
public:
    explicit ThreadPool(std::size_t workers = 1);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t worker_count() const { return threads_.empty() ? 1 : threads_.size() + 1; }

    /// Runs fn(chunk_begin, chunk_end, chunk_index) on [begin, end) split into
    /// worker_count() contiguous chunks. Blocks until all chunks finish.
    /// The calling thread executes chunk 0 itself.
    void parallel_for(std::size_t begin, std::size_t end,
                      const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

private:
    struct Task {
        const std::function<void(std::size_t, std::size_t, std::size_t)>* fn = nullptr;
        std::size_t begin = 0, end = 0, chunk = 0;
    };

    void worker_loop(std::size_t id);

    std::vector<std::thread> threads_;
    std::mutex mtx_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    std::vector<Task> tasks_;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stop_ = false;
};

inline ThreadPool::ThreadPool(std::size_t workers) {
    if (workers < 1) workers = 1;
    tasks_.resize(workers);
    for (std::size_t i = 1; i < workers; ++i)
        threads_.emplace_back([this, i] { worker_loop(i); });
}

inline ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(mtx_);
        stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
}

inline void ThreadPool::worker_loop(std::size_t id) {
    std::size_t seen = 0;
    for (;;) {
        Task task;
        {
            std::unique_lock lk(mtx_);
            cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            task = tasks_[id];
        }
        if (task.fn && task.begin < task.end)
            (*task.fn)(task.begin, task.end, task.chunk);
        {
            std::lock_guard lk(mtx_);
            if (--pending_ == 0) cv_done_.notify_all();
        }
    }
}

inline void ThreadPool::parallel_for(
    std::size_t begin, std::size_t end,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t n = (end > begin) ? end - begin : 0;
    const std::size_t w = worker_count();
    if (n == 0) return;
    if (w == 1) {
        fn(begin, end, 0);
        return;
    }
    const std::size_t chunk = (n + w - 1) / w;
    Task mine;
    {
        std::lock_guard lk(mtx_);
        for (std::size_t i = 0; i < w; ++i) {
            const std::size_t b = begin + i * chunk;
            const std::size_t e = std::min(end, b + chunk);
            tasks_[i] = Task{&fn, std::min(b, end), e, i};
        }
        mine = tasks_[0];
        pending_ = w - 1;
        ++generation_;
    }
    cv_start_.notify_all();
    if (mine.begin < mine.end) (*mine.fn)(mine.begin, mine.end, mine.chunk);
    std::unique_lock lk(mtx_);
    cv_done_.wait(lk, [&] { return pending_ == 0; });
}

} // namespace pdn
