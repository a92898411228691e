#include "sead/partition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sead/rng.hpp"

namespace sead {

const char* to_string(StaticCell v) {
  switch (v) {
    case StaticCell::DS: return "DS";
    case StaticCell::DR: return "DR";
    case StaticCell::NS: return "NS";
    case StaticCell::NR: return "NR";
  }
  return "?";
}

const char* to_string(DynamicCell v) {
  switch (v) {
    case DynamicCell::B: return "B";
    case DynamicCell::S: return "S";
    case DynamicCell::N: return "N";
  }
  return "?";
}

std::string cell_name(StaticCell s, DynamicCell d) {
  return std::string(to_string(s)) + "-" + to_string(d);
}

std::string cell_name(size_t index) {
  return cell_name(static_cast<StaticCell>(index / 3), static_cast<DynamicCell>(index % 3));
}

std::array<std::vector<std::string>, kNumCells> PartitionTable::cells() const {
  std::array<std::vector<std::string>, kNumCells> out;
  for (const auto& [id, cell] : assignment)
    out[cell_index(cell.first, cell.second)].push_back(id);
  // std::map iteration is already sorted by clip_id.
  return out;
}

std::array<uint64_t, kNumCells> PartitionTable::cell_counts() const {
  std::array<uint64_t, kNumCells> out{};
  for (const auto& [id, cell] : assignment) out[cell_index(cell.first, cell.second)]++;
  return out;
}

double acc_score(const CanTrace& trace) {
  const size_t n = trace.accel_y.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (double v : trace.accel_y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : trace.accel_y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);  // population variance
  return std::sqrt(var);
}

double yaw_score(const CanTrace& trace) {
  double sum = 0.0;
  for (double v : trace.yaw_delta) sum += std::abs(v);
  return sum;
}

StaticCell static_partition(const ClipMeta& meta) {
  if (meta.lighting == Lighting::day)
    return meta.weather == Weather::sunny ? StaticCell::DS : StaticCell::DR;
  return meta.weather == Weather::sunny ? StaticCell::NS : StaticCell::NR;
}

namespace {

// Ids of the top ceil(lambda*N) clips by the given score, descending,
// ties by ascending clip_id.
std::set<std::string> valuable_set(const std::vector<DynamicScores>& scores, double lambda,
                                   double DynamicScores::*score) {
  std::vector<const DynamicScores*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [score](const DynamicScores* a, const DynamicScores* b) {
    if (a->*score != b->*score) return a->*score > b->*score;
    return a->clip_id < b->clip_id;
  });
  const size_t k = static_cast<size_t>(
      std::ceil(lambda * static_cast<double>(scores.size())));
  std::set<std::string> out;
  for (size_t i = 0; i < std::min(k, order.size()); ++i) out.insert(order[i]->clip_id);
  return out;
}

}  // namespace

std::map<std::string, DynamicCell> dynamic_partition(const std::vector<DynamicScores>& scores,
                                                     double lambda) {
  if (scores.empty())
    throw Error(ErrorCode::invalid_value, "dynamic_partition needs at least one clip");
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw Error(ErrorCode::bad_config, "lambda must be in (0, 1)");

  const auto acc_v = valuable_set(scores, lambda, &DynamicScores::acc_score);
  const auto yaw_v = valuable_set(scores, lambda, &DynamicScores::yaw_score);

  std::map<std::string, DynamicCell> out;
  for (const auto& s : scores) {
    const bool in_acc = acc_v.count(s.clip_id) > 0;
    const bool in_yaw = yaw_v.count(s.clip_id) > 0;
    DynamicCell cell;
    if (in_acc && in_yaw)
      cell = DynamicCell::B;
    else if (!in_acc && !in_yaw)
      cell = DynamicCell::N;
    else
      cell = DynamicCell::S;
    if (!out.emplace(s.clip_id, cell).second)
      throw Error(ErrorCode::duplicate_clip_id, "'" + s.clip_id + "' scored twice");
  }
  return out;
}

PartitionTable build_partition(const CorpusIndex& corpus, double lambda) {
  std::vector<DynamicScores> scores;
  scores.reserve(corpus.clips.size());
  for (const auto& [id, rec] : corpus.clips)
    scores.push_back({id, acc_score(rec.can), yaw_score(rec.can)});

  const auto dynamic = dynamic_partition(scores, lambda);

  PartitionTable table;
  for (const auto& [id, rec] : corpus.clips)
    table.assignment.emplace(id, std::make_pair(static_partition(rec.meta), dynamic.at(id)));
  return table;
}

std::vector<uint64_t> proportional_allocation(const std::vector<uint64_t>& counts,
                                              uint64_t n_itr) {
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total < n_itr)
    throw Error(ErrorCode::insufficient_pool,
                "pool of " + std::to_string(total) + " clips cannot fill " +
                    std::to_string(n_itr));

  const size_t k = counts.size();
  std::vector<uint64_t> quota(k, 0);
  if (n_itr == 0 || k == 0) return quota;

  std::vector<double> remainder(k, 0.0);
  uint64_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double raw = static_cast<double>(n_itr) * static_cast<double>(counts[i]) /
                       static_cast<double>(total);
    quota[i] = static_cast<uint64_t>(std::floor(raw));
    remainder[i] = raw - static_cast<double>(quota[i]);
    assigned += quota[i];
  }

  // Hand out the leftover units by descending remainder, earliest cell on
  // ties; only cells with room can absorb a unit.
  std::vector<size_t> order(k);
  for (size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainder[a] > remainder[b]; });
  size_t pos = 0;
  while (assigned < n_itr) {
    const size_t i = order[pos % k];
    if (quota[i] < counts[i]) {
      quota[i]++;
      assigned++;
    }
    pos++;
  }
  return quota;
}

std::vector<std::string> initial_select(const PartitionTable& table, uint64_t n_itr,
                                        uint64_t seed) {
  const auto cells = table.cells();
  std::vector<uint64_t> counts(kNumCells);
  for (size_t i = 0; i < kNumCells; ++i) counts[i] = cells[i].size();

  const auto quota = proportional_allocation(counts, n_itr);

  std::vector<std::string> out;
  out.reserve(n_itr);
  for (size_t i = 0; i < kNumCells; ++i) {
    if (quota[i] == 0) continue;
    Rng rng = Rng::derive(seed, cell_name(i));
    const auto picks = rng.sample_without_replacement(static_cast<uint32_t>(cells[i].size()),
                                                      static_cast<uint32_t>(quota[i]));
    for (uint32_t p : picks) out.push_back(cells[i][p]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sead
