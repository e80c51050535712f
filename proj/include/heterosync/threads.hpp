#pragma once
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

// Minimal fork-join pool. Work is split into one contiguous index range per
// worker, so any per-element writes land in disjoint slots and results do not
// depend on scheduling. HETEROSYNC_THREADS caps the worker count.

namespace hs {

inline unsigned max_threads() {
    static unsigned cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("HETEROSYNC_THREADS")) {
            long v = std::atol(env);
            if (v >= 1 && unsigned(v) < hw) hw = unsigned(v);
        }
        return hw;
    }();
    return cached;
}

namespace detail {
inline bool& inside_pool() {
    thread_local bool flag = false;
    return flag;
}
} // namespace detail

class ThreadPool {
  public:
    static ThreadPool& instance() {
        static ThreadPool pool(max_threads());
        return pool;
    }

    unsigned size() const { return unsigned(workers_.size()) + 1; }

    // fn(first, last) on disjoint ranges covering [0, n)
    void run_ranges(size_t n, const std::function<void(size_t, size_t)>& fn) {
        unsigned k = size();
        if (n == 0) return;
        if (k == 1 || n == 1 || detail::inside_pool()) {
            fn(0, n);
            return;
        }
        if (k > n) k = unsigned(n);
        size_t chunk = (n + k - 1) / k;
        {
            std::unique_lock<std::mutex> lk(m_);
            job_ = &fn;
            n_ = n;
            chunk_ = chunk;
            parts_ = k;
            next_part_ = 1; // part 0 runs on the calling thread
            pending_ = k - 1;
        }
        cv_.notify_all();
        detail::inside_pool() = true;
        fn(0, std::min(chunk, n));
        detail::inside_pool() = false;
        std::unique_lock<std::mutex> lk(m_);
        done_cv_.wait(lk, [&] { return pending_ == 0; });
        job_ = nullptr;
    }

  private:
    explicit ThreadPool(unsigned nthreads) {
        for (unsigned i = 0; i + 1 < nthreads; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::unique_lock<std::mutex> lk(m_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    void worker_loop() {
        detail::inside_pool() = true;
        for (;;) {
            const std::function<void(size_t, size_t)>* job = nullptr;
            size_t first = 0, last = 0;
            {
                std::unique_lock<std::mutex> lk(m_);
                cv_.wait(lk, [&] { return stop_ || (job_ && next_part_ < parts_); });
                if (stop_) return;
                unsigned part = next_part_++;
                job = job_;
                first = std::min(size_t(part) * chunk_, n_);
                last = std::min(first + chunk_, n_);
            }
            (*job)(first, last);
            {
                std::unique_lock<std::mutex> lk(m_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex m_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(size_t, size_t)>* job_ = nullptr;
    size_t n_ = 0, chunk_ = 0;
    unsigned parts_ = 0, next_part_ = 0, pending_ = 0;
    bool stop_ = false;
};

// Parallel loop over [0, n). fn(i) must only touch state owned by index i.
template <class F> void parallel_for(size_t n, F&& fn) {
    ThreadPool::instance().run_ranges(n, [&](size_t a, size_t b) {
        for (size_t i = a; i < b; ++i) fn(i);
    });
}

// Parallel loop handing out contiguous [first,last) ranges.
template <class F> void parallel_ranges(size_t n, F&& fn) {
    ThreadPool::instance().run_ranges(n, std::function<void(size_t, size_t)>(std::forward<F>(fn)));
}

} // namespace hs
