#include "eqsadj/store.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace eqsadj {

namespace fs = std::filesystem;

namespace {
std::atomic<int> store_counter{0};
}

TrajectoryStore::TrajectoryStore(TrajectoryStore&& other) noexcept {
  *this = std::move(other);
}

TrajectoryStore& TrajectoryStore::operator=(TrajectoryStore&& other) noexcept {
  if (this == &other) return *this;
  size_ = other.size_;
  mem_ = std::move(other.mem_);
  dir_ = std::move(other.dir_);
  capacity_ = other.capacity_;
  cache_ = std::move(other.cache_);
  lru_ = std::move(other.lru_);
  other.dir_.clear();
  other.size_ = 0;
  return *this;
}

TrajectoryStore::~TrajectoryStore() {
  if (!dir_.empty()) {
    std::error_code ec;
    fs::remove_all(dir_, ec);  // best effort
  }
}

TrajectoryStore TrajectoryStore::memory() { return TrajectoryStore(); }

TrajectoryStore TrajectoryStore::disk(const std::string& scratch_dir,
                                      int cache_capacity) {
  TrajectoryStore s;
  const int id = store_counter.fetch_add(1);
  fs::path dir = fs::path(scratch_dir) /
                 ("eqsadj_traj_" + std::to_string(::getpid()) + "_" +
                  std::to_string(id));
  fs::create_directories(dir);
  s.dir_ = dir.string();
  s.capacity_ = cache_capacity < 2 ? 2 : cache_capacity;
  return s;
}

TrajectoryStore TrajectoryStore::make_default() {
  const char* scratch = std::getenv("EQSADJ_SCRATCH");
  if (scratch != nullptr && scratch[0] != '\0') return disk(scratch);
  return memory();
}

std::string TrajectoryStore::step_path(int i) const {
  char name[32];
  std::snprintf(name, sizeof name, "step_%06d.bin", i);
  return (fs::path(dir_) / name).string();
}

void TrajectoryStore::evict_if_needed() const {
  while (static_cast<int>(cache_.size()) > capacity_) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
}

void TrajectoryStore::append(const Eigen::VectorXd& v) {
  if (dir_.empty()) {
    mem_.push_back(v);
  } else {
    std::ofstream out(step_path(size_), std::ios::binary);
    if (!out)
      throw std::runtime_error("trajectory spill: cannot write to " + dir_);
    const std::int64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    cache_[size_] = v;
    lru_.push_front(size_);
    evict_if_needed();
  }
  ++size_;
}

Eigen::VectorXd TrajectoryStore::get(int i) const {
  if (i < 0 || i >= size_)
    throw std::out_of_range("trajectory index out of range");
  if (dir_.empty()) return mem_[i];
  auto it = cache_.find(i);
  if (it != cache_.end()) {
    lru_.remove(i);
    lru_.push_front(i);
    return it->second;
  }
  std::ifstream in(step_path(i), std::ios::binary);
  if (!in) throw std::runtime_error("trajectory spill: missing step file");
  std::int64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("trajectory spill: short step file");
  cache_[i] = v;
  lru_.push_front(i);
  evict_if_needed();
  return v;
}

}  // namespace eqsadj
