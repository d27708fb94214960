#ifndef BEAMFLOW_ACCESS_LOG_H_
#define BEAMFLOW_ACCESS_LOG_H_

#include <compare>
#include <mutex>
#include <set>
#include <vector>

namespace beamflow {

enum class AccessKind { kFlow, kMultiplier };

// `reader` read state owned by node `owner`. For flows, `arc` is the arc
// read (owned by its tail); multipliers carry arc = -1.
struct Access {
  int reader = 0;
  AccessKind kind = AccessKind::kFlow;
  int owner = 0;
  int arc = -1;

  friend auto operator<=>(const Access&, const Access&) = default;
};

// Thread-safe record of every distinct shared-state read made on behalf of a
// node. Solvers accept an optional AccessLog* and report into it.
class AccessLog {
 public:
  void record(int reader, AccessKind kind, int owner, int arc = -1);

  // Distinct accesses, sorted.
  std::vector<Access> entries() const;
  long total_reads() const;

 private:
  mutable std::mutex mu_;
  std::set<Access> seen_;
  long total_ = 0;
};

}  // namespace beamflow

#endif  // BEAMFLOW_ACCESS_LOG_H_
