#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "beamflow/access_log.h"
#include "beamflow/parallel.h"
#include "beamflow/trace.h"

namespace beamflow {

void AccessLog::record(int reader, AccessKind kind, int owner, int arc) {
  std::lock_guard lock(mu_);
  ++total_;
  seen_.insert({reader, kind, owner, arc});
}

std::vector<Access> AccessLog::entries() const {
  std::lock_guard lock(mu_);
  return {seen_.begin(), seen_.end()};
}

long AccessLog::total_reads() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kRunning:
      return "running";
    case SolveStatus::kTolerance:
      return "tol";
    case SolveStatus::kMaxIters:
      return "max_iters";
  }
  return "unknown";
}

SolveTrace::SolveTrace(long stride) : stride_(std::max(1L, stride)) {}

void SolveTrace::record(const TraceRow& row) {
  for (int t = 0; t < 3; ++t) {
    if (!reached_[t] && row.violation <= kDefaultMilestones[t])
      reached_[t] = row.iter;
    if (!iterate_reached_[t] && row.iterate_violation <= kDefaultMilestones[t])
      iterate_reached_[t] = row.iter;
  }
  last_ = row;
  has_last_ = true;
  if (row.iter % stride_ == 0) rows_.push_back(row);
}

void SolveTrace::finish(SolveStatus status) {
  status_ = status;
  if (has_last_ && (rows_.empty() || rows_.back().iter != last_.iter))
    rows_.push_back(last_);
}

std::optional<long> SolveTrace::first_below(double threshold) const {
  for (int t = 0; t < 3; ++t)
    if (kDefaultMilestones[t] == threshold) return reached_[t];
  return std::nullopt;
}

std::optional<long> SolveTrace::first_iterate_below(double threshold) const {
  for (int t = 0; t < 3; ++t)
    if (kDefaultMilestones[t] == threshold) return iterate_reached_[t];
  return std::nullopt;
}

int default_thread_count() {
  if (const char* env = std::getenv("BEAMFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int begin = static_cast<int>(static_cast<long>(n) * t / threads);
      const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
      workers.emplace_back([&, begin, end] {
        for (int i = begin; i < end; ++i) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace beamflow
