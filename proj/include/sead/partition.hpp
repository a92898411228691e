#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sead/corpus.hpp"

// Initial partitioning of a corpus along two axes:
//   static   lighting x weather -> {DS, DR, NS, NR}
//   dynamic  per-clip CAN statistics -> {B, S, N}, where the top ceil(lambda*N)
//            clips by each score form the "valuable" sets, B = valuable in
//            both, N = valuable in neither, S = the rest
// and the seeded initial draw with proportional per-cell quotas.
//
// All operations are pure; per-cell draws use independent derived streams,
// so they may run in parallel with identical results.

namespace sead {

enum class StaticCell { DS, DR, NS, NR };
enum class DynamicCell { B, S, N };

const char* to_string(StaticCell v);
const char* to_string(DynamicCell v);

constexpr size_t kNumCells = 12;

// Canonical cell order DS-B, DS-S, DS-N, DR-B, ..., NR-N. This order is
// the tie-break for quota rounding and the naming scheme for per-cell
// random streams.
constexpr size_t cell_index(StaticCell s, DynamicCell d) {
  return static_cast<size_t>(s) * 3 + static_cast<size_t>(d);
}

std::string cell_name(StaticCell s, DynamicCell d);
std::string cell_name(size_t index);

struct DynamicScores {
  std::string clip_id;
  double acc_score = 0.0;  // population std-dev of accel_y
  double yaw_score = 0.0;  // sum of |yaw_delta|
};

struct PartitionTable {
  std::map<std::string, std::pair<StaticCell, DynamicCell>> assignment;

  // Cell members sorted by clip_id, in canonical cell order.
  std::array<std::vector<std::string>, kNumCells> cells() const;
  std::array<uint64_t, kNumCells> cell_counts() const;
};

double acc_score(const CanTrace& trace);
double yaw_score(const CanTrace& trace);

StaticCell static_partition(const ClipMeta& meta);

// lambda in (0, 1). Valuable-set size is ceil(lambda * N); score ties are
// broken by ascending clip_id so the assignment is deterministic.
std::map<std::string, DynamicCell> dynamic_partition(
    const std::vector<DynamicScores>& scores, double lambda);

PartitionTable build_partition(const CorpusIndex& corpus, double lambda);

// Largest-remainder rounding of the exact proportional shares
// n_itr * count_i / sum(counts); remainder ties go to the earliest cell in
// the given order. If a quota were ever capped by its cell size the
// surplus moves to uncapped cells by the same rule (with n_itr <= total
// the plain rounding already respects every cap). Throws InsufficientPool
// when sum(counts) < n_itr.
std::vector<uint64_t> proportional_allocation(const std::vector<uint64_t>& counts,
                                              uint64_t n_itr);

// Draws quota clips uniformly without replacement from each cell with an
// independent stream seeded from (seed, cell name); returns the union
// sorted by clip_id.
std::vector<std::string> initial_select(const PartitionTable& table, uint64_t n_itr,
                                        uint64_t seed);

}  // namespace sead
