#include <doctest.h>

#include "helpers.hpp"
#include "sead/shift.hpp"

using namespace sead;
using namespace sead_test;

namespace {

FrameFeatures frame_of(FeatureSet agents, FeatureSet map) {
  map.role = FeatureRole::map;
  return {std::move(agents), std::move(map)};
}

FeatureSet translated(const FeatureSet& f, const std::vector<float>& v) {
  FeatureSet out = f;
  for (uint32_t i = 0; i < out.n; ++i)
    for (uint32_t k = 0; k < out.d; ++k)
      out.points[static_cast<size_t>(i) * out.d + k] += v[k];
  return out;
}

}  // namespace

TEST_CASE("emd_exact: identity, single pair, and the two-point example") {
  Rng rng(3);
  const auto any = random_uniform_set(rng, 5, 3);
  CHECK(emd_exact(any, any) == doctest::Approx(0.0).epsilon(1e-12));

  const auto a = make_set({{0, 0}});
  const auto b = make_set({{3, 4}});
  CHECK(emd_exact(a, b) == doctest::Approx(5.0).epsilon(1e-12));

  // both assignments cost 1 per unit mass; the crossing one costs sqrt(2)
  const auto c = make_set({{0, 0}, {1, 0}});
  const auto d = make_set({{0, 1}, {1, 1}});
  CHECK(emd_exact(c, d) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("emd_exact equals assignment enumeration on small uniform sets") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const uint32_t n = 1 + static_cast<uint32_t>(rng.below(6));
    const uint32_t d = 1 + static_cast<uint32_t>(rng.below(8));
    const auto a = random_uniform_set(rng, n, d);
    const auto b = random_uniform_set(rng, n, d);
    CHECK(std::abs(emd_exact(a, b) - brute_force_emd(a, b)) <= 1e-9);
  }
}

TEST_CASE("emd_exact handles unequal sizes and non-uniform weights") {
  // all of b's mass must travel to a's single point
  const auto a = make_set({{0, 0}});
  auto b = make_set({{1, 0}, {0, 2}});
  b.weights = {0.25, 0.75};
  CHECK(emd_exact(a, b) == doctest::Approx(0.25 * 1.0 + 0.75 * 2.0).epsilon(1e-12));
  CHECK(emd_exact(b, a) == doctest::Approx(emd_exact(a, b)).epsilon(1e-12));
}

TEST_CASE("emd_exact metric axioms on random triples") {
  Rng rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const uint32_t d = 1 + static_cast<uint32_t>(rng.below(6));
    const auto a = random_uniform_set(rng, 1 + rng.below(5), d);
    const auto b = random_uniform_set(rng, 1 + rng.below(5), d);
    const auto c = random_uniform_set(rng, 1 + rng.below(5), d);
    const double ab = emd_exact(a, b);
    const double ba = emd_exact(b, a);
    const double ac = emd_exact(a, c);
    const double cb = emd_exact(c, b);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ab <= ac + cb + 1e-7);
  }
}

TEST_CASE("emd_exact rejects mismatched dimensions") {
  const auto a = make_set({{0, 0}});
  const auto b = make_set({{0, 0, 0}});
  try {
    emd_exact(a, b);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("emd_exact rejects invalid weights") {
  auto a = make_set({{0, 0}, {1, 1}});
  auto b = a;
  a.weights = {0.9, 0.3};  // sums to 1.2
  try {
    emd_exact(a, b);
    FAIL("expected InvalidWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_weights);
  }
}

TEST_CASE("emd_sinkhorn: identical sets cost (almost) nothing") {
  ShiftConfig cfg;
  cfg.sinkhorn_epsilon = 0.01;
  cfg.sinkhorn_max_iter = 10000;
  Rng rng(7);
  const auto a = random_uniform_set(rng, 6, 4);
  CHECK(emd_sinkhorn(a, a, cfg) <= 1e-6);
}

TEST_CASE("emd_sinkhorn tracks emd_exact within 2 percent") {
  ShiftConfig cfg;
  cfg.sinkhorn_epsilon = 0.01;
  cfg.sinkhorn_max_iter = 10000;

  const auto c = make_set({{0, 0}, {1, 0}});
  const auto d = make_set({{0, 1}, {1, 1}});
  CHECK(emd_sinkhorn(c, d, cfg) == doctest::Approx(1.0).epsilon(0.02));

  Rng rng(909);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_uniform_set(rng, 10, 8);
    const auto b = random_uniform_set(rng, 10, 8);
    const double exact = emd_exact(a, b);
    CHECK(emd_sinkhorn(a, b, cfg) == doctest::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("emd_sinkhorn reports non-convergence instead of a bad answer") {
  ShiftConfig cfg;
  cfg.sinkhorn_epsilon = 0.001;  // brutally small
  cfg.sinkhorn_max_iter = 3;     // and almost no budget
  Rng rng(11);
  const auto a = random_uniform_set(rng, 8, 4);
  const auto b = random_uniform_set(rng, 8, 4);
  try {
    emd_sinkhorn(a, b, cfg);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
    CHECK(std::string(e.what()).find("violation") != std::string::npos);
  }
}

TEST_CASE("centroid_shift: examples and the lower-bound relationship") {
  Rng rng(13);
  const auto any = random_uniform_set(rng, 4, 5);
  CHECK(centroid_shift(any, any) == 0.0);

  CHECK(centroid_shift(make_set({{0, 0}}), make_set({{3, 4}})) ==
        doctest::Approx(5.0).epsilon(1e-12));

  // both centroids sit at (1, 0) although the sets differ; exact EMD is
  // strictly positive, so centroid is a strict lower bound here
  const auto a = make_set({{0, 0}, {2, 0}});
  const auto b = make_set({{1, 1}, {1, -1}});
  CHECK(centroid_shift(a, b) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(emd_exact(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    const uint32_t d = 1 + static_cast<uint32_t>(rng.below(6));
    const auto x = random_uniform_set(rng, 1 + rng.below(6), d);
    const auto y = random_uniform_set(rng, 1 + rng.below(6), d);
    CHECK(centroid_shift(x, y) <= emd_exact(x, y) + 1e-9);
  }
}

TEST_CASE("translation covariance and scale equivariance") {
  // Dyadic coordinates keep every translation and power-of-two scaling
  // exact in f32, so the engine properties hold to double precision.
  Rng rng(17);
  ShiftConfig scfg;
  scfg.sinkhorn_epsilon = 0.05;
  scfg.sinkhorn_max_iter = 5000;
  for (int trial = 0; trial < 10; ++trial) {
    const uint32_t d = 2 + static_cast<uint32_t>(rng.below(4));
    const auto a = dyadic_set(rng, 2 + rng.below(5), d);
    const auto b = dyadic_set(rng, 2 + rng.below(5), d);
    std::vector<float> v(d);
    for (auto& x : v) x = dyadic(rng);

    const double base_exact = emd_exact(a, b);
    const double base_centroid = centroid_shift(a, b);
    const double base_sink = emd_sinkhorn(a, b, scfg);
    CHECK(std::abs(emd_exact(translated(a, v), translated(b, v)) - base_exact) <= 1e-9);
    CHECK(std::abs(centroid_shift(translated(a, v), translated(b, v)) - base_centroid) <= 1e-9);
    CHECK(std::abs(emd_sinkhorn(translated(a, v), translated(b, v), scfg) - base_sink) <= 1e-7);

    const float s = rng.below(2) ? 0.5f : 4.0f;
    FeatureSet sa = a, sb = b;
    for (auto& p : sa.points) p *= s;
    for (auto& p : sb.points) p *= s;
    CHECK(emd_exact(sa, sb) == doctest::Approx(s * base_exact).epsilon(1e-9));
    CHECK(centroid_shift(sa, sb) == doctest::Approx(s * base_centroid).epsilon(1e-9));
  }
}

TEST_CASE("reduce_dim: pass-through, determinism, and distance preservation") {
  Rng rng(19);
  const auto f = random_uniform_set(rng, 20, 32);

  ShiftConfig cfg;  // reduce_dim unset
  const auto same = reduce_dim(f, cfg);
  CHECK(same.d == f.d);
  CHECK(same.points == f.points);

  cfg.reduce_dim = 8;
  cfg.projection_seed = 123;
  const auto r1 = reduce_dim(f, cfg);
  const auto r2 = reduce_dim(f, cfg);
  CHECK(r1.d == 8);
  CHECK(r1.points == r2.points);
  CHECK(r1.weights == f.weights);

  // pairwise distances preserved within x(1 +- 0.6) for 95% of pairs
  int ok = 0, total = 0;
  for (uint32_t i = 0; i < f.n; ++i) {
    for (uint32_t j = i + 1; j < f.n; ++j) {
      double orig = 0, proj = 0;
      for (uint32_t k = 0; k < f.d; ++k) {
        const double diff = static_cast<double>(f.row(i)[k]) - f.row(j)[k];
        orig += diff * diff;
      }
      for (uint32_t k = 0; k < r1.d; ++k) {
        const double diff = static_cast<double>(r1.row(i)[k]) - r1.row(j)[k];
        proj += diff * diff;
      }
      orig = std::sqrt(orig);
      proj = std::sqrt(proj);
      if (proj >= 0.4 * orig && proj <= 1.6 * orig) ok++;
      total++;
    }
  }
  CHECK(static_cast<double>(ok) / total >= 0.95);
}

TEST_CASE("reduce_dim rejects a target at or above d") {
  Rng rng(23);
  const auto f = random_uniform_set(rng, 3, 4);
  ShiftConfig cfg;
  cfg.reduce_dim = 4;
  try {
    reduce_dim(f, cfg);
    FAIL("expected BadTargetDim");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::bad_target_dim);
  }
}

TEST_CASE("frame_shift: identical frames, translated map, engine ordering") {
  Rng rng(29);
  const auto agents = dyadic_set(rng, 4, 3);
  const auto map = dyadic_set(rng, 5, 3);

  ShiftConfig cfg;
  cfg.engine = ShiftEngine::centroid;
  const auto frame = frame_of(agents, map);
  const auto zero = frame_shift(frame, frame, cfg);
  CHECK(zero.first == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.second == doctest::Approx(0.0).epsilon(1e-12));

  // map translated by v: centroid moves by exactly ||v|| (v and the
  // lattice points stay exact in f32)
  const std::vector<float> v = {0.75f, -0.5f, 0.0f};
  const auto moved = frame_of(agents, translated(map, v));
  const auto pair = frame_shift(moved, frame, cfg);
  CHECK(pair.first == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(pair.second - std::hypot(0.75, -0.5)) <= 1e-9);

  // exact dominates centroid on both components
  for (int trial = 0; trial < 10; ++trial) {
    const auto cur = frame_of(random_uniform_set(rng, 3 + rng.below(3), 4),
                              random_uniform_set(rng, 3 + rng.below(3), 4));
    const auto prev = frame_of(random_uniform_set(rng, 3 + rng.below(3), 4),
                               random_uniform_set(rng, 3 + rng.below(3), 4));
    ShiftConfig exact_cfg;
    exact_cfg.engine = ShiftEngine::exact;
    ShiftConfig centroid_cfg;
    centroid_cfg.engine = ShiftEngine::centroid;
    const auto e = frame_shift(cur, prev, exact_cfg);
    const auto c = frame_shift(cur, prev, centroid_cfg);
    CHECK(e.first + 1e-9 >= c.first);
    CHECK(e.second + 1e-9 >= c.second);
  }
}

TEST_CASE("scene_shift: static clip, translating map, and the pair-sum oracle") {
  Rng rng(31);
  ShiftConfig cfg;
  cfg.engine = ShiftEngine::centroid;

  ClipFeatures still;
  still.clip_id = "still";
  const auto frame = frame_of(random_uniform_set(rng, 3, 2), random_uniform_set(rng, 4, 2));
  still.frames = {frame, frame, frame};
  const auto s0 = scene_shift(still, cfg);
  CHECK(s0.total == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s0.per_frame.size() == 2);

  // 3 frames, map translating by (1, 0) per step: total 2.0
  ClipFeatures moving;
  moving.clip_id = "moving";
  const auto agents = dyadic_set(rng, 3, 2);
  const auto map = dyadic_set(rng, 4, 2);
  moving.frames = {frame_of(agents, map), frame_of(agents, translated(map, {1, 0})),
                   frame_of(agents, translated(map, {2, 0}))};
  const auto s1 = scene_shift(moving, cfg);
  CHECK(s1.agent_total == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s1.map_total == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s1.total == doctest::Approx(2.0).epsilon(1e-9));

  // random clip: total equals an independent pair loop
  ClipFeatures random_clip;
  random_clip.clip_id = "rand";
  for (int t = 0; t < 6; ++t)
    random_clip.frames.push_back(frame_of(random_uniform_set(rng, 2 + rng.below(4), 5),
                                          random_uniform_set(rng, 2 + rng.below(4), 5)));
  const auto s2 = scene_shift(random_clip, cfg);
  double expected = 0;
  for (size_t t = 1; t < random_clip.frames.size(); ++t) {
    expected += centroid_shift(random_clip.frames[t].agents, random_clip.frames[t - 1].agents);
    expected += centroid_shift(random_clip.frames[t].map, random_clip.frames[t - 1].map);
  }
  CHECK(std::abs(s2.total - expected) <= 1e-9);
  double per_frame_sum = 0;
  for (const auto& p : s2.per_frame) per_frame_sum += p.first + p.second;
  CHECK(std::abs(s2.total - per_frame_sum) <= 1e-9);
}

TEST_CASE("scene_shift rejects single-frame clips") {
  Rng rng(37);
  ClipFeatures clip;
  clip.clip_id = "short";
  clip.frames.push_back(frame_of(random_uniform_set(rng, 2, 2), random_uniform_set(rng, 2, 2)));
  try {
    scene_shift(clip, ShiftConfig{});
    FAIL("expected ClipTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::clip_too_short);
  }
}

TEST_CASE("rank_clips: ordering, ties, and the sort oracle") {
  std::vector<SceneShift> shifts(3);
  shifts[0].clip_id = "c0";
  shifts[0].total = 3.0;
  shifts[1].clip_id = "c1";
  shifts[1].total = 1.0;
  shifts[2].clip_id = "c2";
  shifts[2].total = 2.0;
  CHECK(rank_clips(shifts, 2) == std::vector<std::string>{"c0", "c2"});

  for (auto& s : shifts) s.total = 5.0;
  CHECK(rank_clips(shifts, 2) == std::vector<std::string>{"c0", "c1"});

  Rng rng(41);
  std::vector<SceneShift> many(100);
  for (size_t i = 0; i < many.size(); ++i) {
    many[i].clip_id = "m" + std::to_string(100 + i);
    many[i].total = rng.normal();
  }
  const auto top = rank_clips(many, 10);
  auto sorted = many;
  std::sort(sorted.begin(), sorted.end(), [](const SceneShift& a, const SceneShift& b) {
    return a.total != b.total ? a.total > b.total : a.clip_id < b.clip_id;
  });
  for (int i = 0; i < 10; ++i) CHECK(top[i] == sorted[i].clip_id);

  try {
    rank_clips(many, 101);
    FAIL("expected BudgetExceedsPool");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::budget_exceeds_pool);
  }
}

TEST_CASE("ranking is invariant under monotone transforms of the totals") {
  Rng rng(43);
  std::vector<SceneShift> shifts(40);
  for (size_t i = 0; i < shifts.size(); ++i) {
    shifts[i].clip_id = "t" + std::to_string(100 + i);
    shifts[i].total = std::abs(rng.normal());
  }
  const auto base = rank_clips(shifts, 12);
  auto transformed = shifts;
  for (auto& s : transformed) s.total = std::exp(2.0 * s.total) + 5.0;
  CHECK(rank_clips(transformed, 12) == base);
}
