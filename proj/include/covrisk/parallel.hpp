#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

namespace covrisk {

// Accumulator with compensated (Kahan) summation, so merged totals are stable
// to the last bit regardless of how many terms each shard contributed.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Fixed-size sharding of a replicate budget. The plan depends only on the
// total, never on the worker count, so results are identical for any number
// of workers: shard i always covers the same replicate indices and always
// draws from the same substream.
struct ShardPlan {
  std::size_t total = 0;
  std::size_t shard_size = 0;
  std::size_t shard_count = 0;

  std::size_t shard_begin(std::size_t shard) const { return shard * shard_size; }
  std::size_t shard_extent(std::size_t shard) const {
    const std::size_t begin = shard_begin(shard);
    return begin >= total ? 0 : std::min(shard_size, total - begin);
  }
};

inline ShardPlan make_shard_plan(std::size_t total, std::size_t shard_size = 4096) {
  ShardPlan plan;
  plan.total = total;
  plan.shard_size = shard_size;
  plan.shard_count = total == 0 ? 0 : (total + shard_size - 1) / shard_size;
  return plan;
}

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(shard_index, extent) for every shard and returns the per-shard
// results in shard order. Shards are claimed dynamically but the result
// vector is indexed by shard, so the reduction order downstream is fixed.
template <typename Result, typename Fn>
std::vector<Result> run_sharded(const ShardPlan& plan, int workers, Fn fn) {
  std::vector<Result> results(plan.shard_count);
  const int nworkers =
      std::min<int>(resolve_workers(workers), static_cast<int>(plan.shard_count));
  if (nworkers <= 1) {
    for (std::size_t s = 0; s < plan.shard_count; ++s) results[s] = fn(s, plan.shard_extent(s));
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= plan.shard_count) return;
      results[s] = fn(s, plan.shard_extent(s));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  for (int i = 0; i < nworkers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace covrisk
