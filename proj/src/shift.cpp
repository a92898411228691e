#include "sead/shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sead/rng.hpp"

namespace sead {

const char* to_string(ShiftEngine v) {
  switch (v) {
    case ShiftEngine::exact: return "exact";
    case ShiftEngine::sinkhorn: return "sinkhorn";
    case ShiftEngine::centroid: return "centroid";
  }
  return "?";
}

ShiftEngine engine_from_string(std::string_view s) {
  if (s == "exact") return ShiftEngine::exact;
  if (s == "sinkhorn") return ShiftEngine::sinkhorn;
  if (s == "centroid") return ShiftEngine::centroid;
  throw Error(ErrorCode::bad_config, "unknown shift engine '" + std::string(s) + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const FeatureSet& a, const FeatureSet& b) {
  a.validate();
  b.validate();
  if (a.d != b.d)
    throw Error(ErrorCode::dimension_mismatch,
                "feature dims " + std::to_string(a.d) + " vs " + std::to_string(b.d));
}

std::vector<double> normalized_weights(const FeatureSet& f) {
  std::vector<double> w(f.weights.begin(), f.weights.end());
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

double sq_distance(const float* x, const float* y, uint32_t d) {
  double acc = 0.0;
  for (uint32_t i = 0; i < d; ++i) {
    const double diff = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += diff * diff;
  }
  return acc;
}

// Euclidean ground costs, n*m row-major.
std::vector<double> ground_cost(const FeatureSet& a, const FeatureSet& b) {
  std::vector<double> c(static_cast<size_t>(a.n) * b.n);
  for (uint32_t i = 0; i < a.n; ++i)
    for (uint32_t j = 0; j < b.n; ++j)
      c[static_cast<size_t>(i) * b.n + j] = std::sqrt(sq_distance(a.row(i), b.row(j), a.d));
  return c;
}

// Exact min-cost transportation on the dense bipartite graph by successive
// shortest augmenting paths with node potentials. Supplies and demands are
// real masses; each augmentation exactly zeroes at least one of its
// bottlenecks (min of equal doubles subtracts to 0), so the loop terminates.
// Nodes 0..n-1 are sources, n..n+m-1 sinks.
double transport_min_cost(size_t n, size_t m, const std::vector<double>& cost,
                          std::vector<double> supply, std::vector<double> demand) {
  constexpr double kMassEps = 1e-12;
  const size_t num_nodes = n + m;

  std::vector<double> flow(n * m, 0.0);
  std::vector<double> pot(num_nodes, 0.0);
  std::vector<double> dist(num_nodes);
  std::vector<int> parent(num_nodes);
  std::vector<char> done(num_nodes);

  size_t guard = 256 + 16 * num_nodes * std::max(n, m);
  for (;;) {
    bool any_supply = false;
    for (size_t i = 0; i < n; ++i)
      if (supply[i] > kMassEps) {
        any_supply = true;
        break;
      }
    if (!any_supply) break;

    // Dijkstra over reduced costs from every source that still has supply.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (size_t i = 0; i < n; ++i)
      if (supply[i] > kMassEps) dist[i] = 0.0;

    int target = -1;
    for (;;) {
      int x = -1;
      double best = kInf;
      for (size_t z = 0; z < num_nodes; ++z)
        if (!done[z] && dist[z] < best) {
          best = dist[z];
          x = static_cast<int>(z);
        }
      if (x < 0) break;
      done[x] = 1;

      if (static_cast<size_t>(x) >= n) {
        const size_t j = static_cast<size_t>(x) - n;
        if (demand[j] > kMassEps) {
          target = x;
          break;
        }
        // Relax backward arcs (j -> i) available where flow is positive.
        for (size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] <= kMassEps) continue;
          const double r = std::max(0.0, -cost[i * m + j] + pot[x] - pot[i]);
          const double nd = dist[x] + r;
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = x;
          }
        }
      } else {
        const size_t i = static_cast<size_t>(x);
        for (size_t j = 0; j < m; ++j) {
          const double r = std::max(0.0, cost[i * m + j] + pot[x] - pot[n + j]);
          const double nd = dist[x] + r;
          if (nd < dist[n + j]) {
            dist[n + j] = nd;
            parent[n + j] = x;
          }
        }
      }
    }

    if (target < 0)
      throw Error(ErrorCode::internal, "transport: no augmenting path with mass remaining");

    const double dt = dist[target];
    for (size_t z = 0; z < num_nodes; ++z) pot[z] += std::min(dist[z], dt);

    // Bottleneck along the path, then augment.
    double delta = demand[static_cast<size_t>(target) - n];
    int x = target;
    while (parent[x] >= 0) {
      const int p = parent[x];
      if (p >= static_cast<int>(n))  // backward arc through source x
        delta = std::min(delta, flow[static_cast<size_t>(x) * m + (p - n)]);
      x = p;
    }
    delta = std::min(delta, supply[x]);

    int y = target;
    while (parent[y] >= 0) {
      const int p = parent[y];
      if (p < static_cast<int>(n))
        flow[static_cast<size_t>(p) * m + (y - static_cast<int>(n))] += delta;
      else
        flow[static_cast<size_t>(y) * m + (p - static_cast<int>(n))] -= delta;
      y = p;
    }
    supply[y] -= delta;
    demand[static_cast<size_t>(target) - n] -= delta;

    if (--guard == 0)
      throw Error(ErrorCode::internal, "transport: augmentation guard exceeded");
  }

  double total = 0.0;
  for (size_t k = 0; k < flow.size(); ++k) total += flow[k] * cost[k];
  return total;
}

double log_sum_exp(const double* vals, size_t count) {
  double mx = -kInf;
  for (size_t i = 0; i < count; ++i) mx = std::max(mx, vals[i]);
  if (mx == -kInf) return -kInf;
  double acc = 0.0;
  for (size_t i = 0; i < count; ++i) acc += std::exp(vals[i] - mx);
  return mx + std::log(acc);
}

}  // namespace

double emd_exact(const FeatureSet& a, const FeatureSet& b) {
  check_pair(a, b);
  return transport_min_cost(a.n, b.n, ground_cost(a, b), normalized_weights(a),
                            normalized_weights(b));
}

double emd_sinkhorn(const FeatureSet& a, const FeatureSet& b, const ShiftConfig& cfg) {
  check_pair(a, b);
  if (!(cfg.sinkhorn_epsilon > 0.0))
    throw Error(ErrorCode::bad_config, "sinkhorn_epsilon must be > 0");
  if (cfg.sinkhorn_max_iter == 0)
    throw Error(ErrorCode::bad_config, "sinkhorn_max_iter must be > 0");

  const size_t n = a.n, m = b.n;
  const auto wa = normalized_weights(a);
  const auto wb = normalized_weights(b);
  const auto cost = ground_cost(a, b);

  double mean_cost = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) mean_cost += wa[i] * wb[j] * cost[i * m + j];
  if (mean_cost <= 0.0) return 0.0;  // every weighted pair sits at zero cost

  const double eps = cfg.sinkhorn_epsilon * mean_cost;

  constexpr double kLogZero = -1e30;
  std::vector<double> loga(n), logb(m);
  for (size_t i = 0; i < n; ++i) loga[i] = wa[i] > 0.0 ? std::log(wa[i]) : kLogZero;
  for (size_t j = 0; j < m; ++j) logb[j] = wb[j] > 0.0 ? std::log(wb[j]) : kLogZero;

  // Small regularization needs many plain scaling sweeps, so anneal:
  // a geometric epsilon ladder from the mean cost down to the target,
  // warm-starting the duals (kept in cost units) at every rung, and
  // overrelax the dual updates once a rung has settled. A sweep whose
  // violation got worse forces the next one back to a plain update.
  // Sweeps on every rung count against max_iter; the tolerance only has
  // to hold at the target epsilon.
  constexpr double kOmega = 1.8;
  constexpr uint32_t kPlainSweeps = 3;

  std::vector<double> ladder;
  for (double e = mean_cost; e > 1.5 * eps; e *= 0.5) ladder.push_back(e);
  ladder.push_back(eps);

  std::vector<double> f(n, 0.0), g(m, 0.0);  // dual potentials, cost units
  std::vector<double> scratch(std::max(n, m));
  uint32_t sweeps_left = cfg.sinkhorn_max_iter;
  double violation = kInf;

  for (size_t stage = 0; stage < ladder.size(); ++stage) {
    const double e = ladder[stage];
    const double inv_e = 1.0 / e;
    const bool last = stage + 1 == ladder.size();
    const double stage_tol = last ? cfg.sinkhorn_tol : std::max(cfg.sinkhorn_tol, 1e-4);
    const uint32_t stage_cap = last ? sweeps_left : std::min<uint32_t>(sweeps_left, 200);

    violation = kInf;
    double prev_violation = kInf;
    for (uint32_t iter = 0; iter < stage_cap && violation >= stage_tol; ++iter) {
      const bool relax = iter >= kPlainSweeps && violation <= prev_violation;
      const double w = relax ? kOmega : 1.0;
      prev_violation = violation;

      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j)
          scratch[j] = logb[j] + (g[j] - cost[i * m + j]) * inv_e;
        f[i] = (1.0 - w) * f[i] - w * e * log_sum_exp(scratch.data(), m);
      }
      for (size_t j = 0; j < m; ++j) {
        for (size_t i = 0; i < n; ++i)
          scratch[i] = loga[i] + (f[i] - cost[i * m + j]) * inv_e;
        g[j] = (1.0 - w) * g[j] - w * e * log_sum_exp(scratch.data(), n);
      }
      // L1 gap of both marginals (overrelaxed sweeps leave neither exact).
      std::vector<double> col(m, 0.0);
      violation = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (size_t j = 0; j < m; ++j) {
          const double gamma =
              std::exp(loga[i] + logb[j] + (f[i] + g[j] - cost[i * m + j]) * inv_e);
          row += gamma;
          col[j] += gamma;
        }
        violation += std::abs(row - wa[i]);
      }
      for (size_t j = 0; j < m; ++j) violation += std::abs(col[j] - wb[j]);
      sweeps_left--;
    }
    if (sweeps_left == 0 && !last) break;
  }

  if (!(violation < cfg.sinkhorn_tol))
    throw Error(ErrorCode::non_convergence,
                "sinkhorn: L1 marginal violation " + std::to_string(violation) + " after " +
                    std::to_string(cfg.sinkhorn_max_iter) + " iterations (tol " +
                    std::to_string(cfg.sinkhorn_tol) + ")");

  const double inv_eps = 1.0 / eps;
  double transport_cost = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      transport_cost += std::exp(loga[i] + logb[j] + (f[i] + g[j] - cost[i * m + j]) * inv_eps) *
                        cost[i * m + j];
  return transport_cost;
}

double centroid_shift(const FeatureSet& a, const FeatureSet& b) {
  check_pair(a, b);
  const auto wa = normalized_weights(a);
  const auto wb = normalized_weights(b);
  double acc = 0.0;
  for (uint32_t k = 0; k < a.d; ++k) {
    double ca = 0.0, cb = 0.0;
    for (uint32_t i = 0; i < a.n; ++i) ca += wa[i] * a.row(i)[k];
    for (uint32_t j = 0; j < b.n; ++j) cb += wb[j] * b.row(j)[k];
    acc += (ca - cb) * (ca - cb);
  }
  return std::sqrt(acc);
}

FeatureSet reduce_dim(const FeatureSet& f, const ShiftConfig& cfg) {
  f.validate();
  if (!cfg.reduce_dim) return f;
  const uint32_t k = *cfg.reduce_dim;
  if (k == 0 || k >= f.d)
    throw Error(ErrorCode::bad_target_dim,
                "target dim " + std::to_string(k) + " must be in [1, d) with d = " +
                    std::to_string(f.d));

  // Sign matrix fixed by (seed, d, k): identical for every call, so all
  // frames of a clip land in the same projected space.
  Rng rng = Rng::derive(cfg.projection_seed,
                        "proj:" + std::to_string(f.d) + ":" + std::to_string(k));
  std::vector<float> signs(static_cast<size_t>(k) * f.d);
  for (auto& s : signs) s = rng.below(2) ? 1.0f : -1.0f;
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));

  FeatureSet out;
  out.role = f.role;
  out.n = f.n;
  out.d = k;
  out.weights = f.weights;
  out.points.resize(static_cast<size_t>(f.n) * k);
  for (uint32_t p = 0; p < f.n; ++p) {
    const float* x = f.row(p);
    for (uint32_t j = 0; j < k; ++j) {
      double acc = 0.0;
      const float* srow = signs.data() + static_cast<size_t>(j) * f.d;
      for (uint32_t i = 0; i < f.d; ++i) acc += static_cast<double>(srow[i]) * x[i];
      out.points[static_cast<size_t>(p) * k + j] = static_cast<float>(acc * scale);
    }
  }
  return out;
}

namespace {

double apply_engine(const FeatureSet& a, const FeatureSet& b, const ShiftConfig& cfg) {
  switch (cfg.engine) {
    case ShiftEngine::exact: return emd_exact(a, b);
    case ShiftEngine::sinkhorn: return emd_sinkhorn(a, b, cfg);
    case ShiftEngine::centroid: return centroid_shift(a, b);
  }
  throw Error(ErrorCode::internal, "unreachable engine");
}

}  // namespace

std::pair<double, double> frame_shift(const FrameFeatures& cur, const FrameFeatures& prev,
                                      const ShiftConfig& cfg) {
  ShiftConfig engine_cfg = cfg;
  engine_cfg.reduce_dim.reset();
  const double fs_a =
      apply_engine(reduce_dim(cur.agents, cfg), reduce_dim(prev.agents, cfg), engine_cfg);
  const double fs_m =
      apply_engine(reduce_dim(cur.map, cfg), reduce_dim(prev.map, cfg), engine_cfg);
  return {fs_a, fs_m};
}

SceneShift scene_shift(const ClipFeatures& features, const ShiftConfig& cfg) {
  const size_t T = features.frames.size();
  if (T < 2)
    throw Error(ErrorCode::clip_too_short,
                "clip '" + features.clip_id + "' has " + std::to_string(T) + " frame(s)");

  // Reduce each frame once; pairwise engines then run in the projected
  // space with reduction disabled.
  const std::vector<FrameFeatures>* frames = &features.frames;
  std::vector<FrameFeatures> reduced;
  if (cfg.reduce_dim) {
    reduced.reserve(T);
    for (const FrameFeatures& fr : features.frames)
      reduced.push_back({reduce_dim(fr.agents, cfg), reduce_dim(fr.map, cfg)});
    frames = &reduced;
  }
  ShiftConfig engine_cfg = cfg;
  engine_cfg.reduce_dim.reset();

  SceneShift out;
  out.clip_id = features.clip_id;
  out.per_frame.reserve(T - 1);
  for (size_t t = 1; t < T; ++t)
    out.per_frame.push_back(frame_shift((*frames)[t], (*frames)[t - 1], engine_cfg));

  if (cfg.normalize_components) {
    for (int comp = 0; comp < 2; ++comp) {
      double mean = 0.0;
      for (const auto& p : out.per_frame) mean += comp == 0 ? p.first : p.second;
      mean /= static_cast<double>(out.per_frame.size());
      double var = 0.0;
      for (const auto& p : out.per_frame) {
        const double v = (comp == 0 ? p.first : p.second) - mean;
        var += v * v;
      }
      const double sd = std::sqrt(var / static_cast<double>(out.per_frame.size()));
      if (sd > 1e-12) {
        for (auto& p : out.per_frame) {
          if (comp == 0)
            p.first /= sd;
          else
            p.second /= sd;
        }
      }
    }
  }

  for (const auto& p : out.per_frame) {
    out.agent_total += p.first;
    out.map_total += p.second;
  }
  out.total = out.agent_total + out.map_total;
  return out;
}

std::vector<std::string> rank_clips(const std::vector<SceneShift>& shifts, size_t n) {
  if (n > shifts.size())
    throw Error(ErrorCode::budget_exceeds_pool,
                "requested " + std::to_string(n) + " clips from " +
                    std::to_string(shifts.size()));
  std::vector<const SceneShift*> order;
  order.reserve(shifts.size());
  for (const auto& s : shifts) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const SceneShift* a, const SceneShift* b) {
    if (a->total != b->total) return a->total > b->total;
    return a->clip_id < b->clip_id;
  });
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(order[i]->clip_id);
  return out;
}

}  // namespace sead
