#ifndef BEAMFLOW_PARALLEL_H_
#define BEAMFLOW_PARALLEL_H_

#include <functional>

namespace beamflow {

// BEAMFLOW_THREADS when set to a positive integer, else the hardware count.
int default_thread_count();

// Runs fn(0..n-1) on up to `threads` workers in contiguous blocks. If any
// call throws, the exception from the lowest index is rethrown after all
// workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace beamflow

#endif  // BEAMFLOW_PARALLEL_H_
