#pragma once

#include <Eigen/Core>
#include <list>
#include <map>
#include <string>
#include <vector>

namespace eqsadj {

// Per-step nodal vectors of a trajectory. Default backend keeps everything
// in memory; the disk backend writes each vector to a scratch directory and
// keeps a small LRU cache, trading memory for I/O on long runs. The scratch
// directory comes from the EQSADJ_SCRATCH environment variable when
// make_default is used.
class TrajectoryStore {
 public:
  TrajectoryStore() = default;
  TrajectoryStore(TrajectoryStore&&) noexcept;
  TrajectoryStore& operator=(TrajectoryStore&&) noexcept;
  TrajectoryStore(const TrajectoryStore&) = delete;
  TrajectoryStore& operator=(const TrajectoryStore&) = delete;
  ~TrajectoryStore();

  static TrajectoryStore memory();
  static TrajectoryStore disk(const std::string& scratch_dir,
                              int cache_capacity = 32);
  // Disk-backed under EQSADJ_SCRATCH when set, else in-memory.
  static TrajectoryStore make_default();

  void append(const Eigen::VectorXd& v);
  Eigen::VectorXd get(int i) const;
  int size() const { return size_; }
  bool on_disk() const { return !dir_.empty(); }

 private:
  std::string step_path(int i) const;
  void evict_if_needed() const;

  int size_ = 0;
  std::vector<Eigen::VectorXd> mem_;
  std::string dir_;  // empty: memory backend
  int capacity_ = 32;
  mutable std::map<int, Eigen::VectorXd> cache_;
  mutable std::list<int> lru_;
};

}  // namespace eqsadj
