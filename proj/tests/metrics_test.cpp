#include "sut/metrics.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>
#include <vector>

namespace sut {
namespace {

BoundingBox unit_box(double cx, double cy, double side = 10.0) {
  return {cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};
}

TrajectorySet one_track_ten_frames() {
  TrajectorySet gt;
  for (int f = 1; f <= 10; ++f) {
    gt.add(f, 1, unit_box(10.0 + 3.0 * f, 20.0));
  }
  return gt;
}

TEST(TrajectorySetTest, AddValidatesInvariants) {
  TrajectorySet t;
  t.add(1, 5, unit_box(0, 0));
  EXPECT_THROW(t.add(1, 5, unit_box(10, 10)), std::invalid_argument);
  EXPECT_THROW(t.add(0, 1, unit_box(0, 0)), std::invalid_argument);
  t.add(2, 5, unit_box(1, 1));
  EXPECT_EQ(t.entry_count(), 2u);
  EXPECT_FALSE(t.empty());
  EXPECT_TRUE(TrajectorySet{}.empty());
}

TEST(ClearMetrics, PerfectPredictionIsFlawless) {
  const TrajectorySet gt = one_track_ten_frames();
  const EvalReport r = clear_metrics(gt, gt);
  EXPECT_DOUBLE_EQ(r.mota, 1.0);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.frag, 0);
  EXPECT_EQ(r.gt_count, 10);
}

TEST(ClearMetrics, EmptyPredictionMissesEverything) {
  const TrajectorySet gt = one_track_ten_frames();
  const EvalReport r = clear_metrics(gt, TrajectorySet{});
  EXPECT_EQ(r.fn, 10);
  EXPECT_EQ(r.fp, 0);
  EXPECT_DOUBLE_EQ(r.mota, 0.0);
}

TEST(ClearMetrics, SingleIdentityChangeCostsOneSwitch) {
  const TrajectorySet gt = one_track_ten_frames();
  TrajectorySet pred;
  for (int f = 1; f <= 10; ++f) {
    pred.add(f, f <= 5 ? 100 : 200, unit_box(10.0 + 3.0 * f, 20.0));
  }
  const EvalReport r = evaluate(gt, pred);
  EXPECT_EQ(r.idsw, 1);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_EQ(r.frag, 0);
  EXPECT_DOUBLE_EQ(r.mota, 0.9);
  // The same split seen by the identity metrics: the better half is credited,
  // the other half is both missed and spurious.
  EXPECT_EQ(r.idtp, 5);
  EXPECT_EQ(r.idfn, 5);
  EXPECT_EQ(r.idfp, 5);
  EXPECT_DOUBLE_EQ(r.idf1, 0.5);
  EXPECT_DOUBLE_EQ(r.idp, 0.5);
  EXPECT_DOUBLE_EQ(r.idr, 0.5);
}

TEST(ClearMetrics, GapWithoutRelabelIsFragmentationNotSwitch) {
  const TrajectorySet gt = one_track_ten_frames();
  TrajectorySet pred;
  for (int f = 1; f <= 10; ++f) {
    if (f == 5 || f == 6) continue;
    pred.add(f, 7, unit_box(10.0 + 3.0 * f, 20.0));
  }
  const EvalReport r = clear_metrics(gt, pred);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.frag, 1);
  EXPECT_EQ(r.fn, 2);
  EXPECT_EQ(r.fp, 0);
  EXPECT_DOUBLE_EQ(r.mota, 0.8);
}

TEST(ClearMetrics, RelabelAcrossGapCountsSwitchAndFragmentation) {
  const TrajectorySet gt = one_track_ten_frames();
  TrajectorySet pred;
  for (int f = 1; f <= 3; ++f) pred.add(f, 1, unit_box(10.0 + 3.0 * f, 20.0));
  for (int f = 6; f <= 10; ++f) pred.add(f, 2, unit_box(10.0 + 3.0 * f, 20.0));
  const EvalReport r = clear_metrics(gt, pred);
  EXPECT_EQ(r.idsw, 1);
  EXPECT_EQ(r.frag, 1);
  EXPECT_EQ(r.fn, 2);
}

TEST(ClearMetrics, CarryOverBeatsHigherOverlapNewcomer) {
  TrajectorySet gt;
  gt.add(1, 1, unit_box(5, 5));
  gt.add(2, 1, unit_box(5, 5));
  TrajectorySet pred;
  pred.add(1, 10, unit_box(5, 5));
  // Frame 2: the carried prediction overlaps well; a new identity overlaps
  // slightly better. The established pair must win, the newcomer becomes a
  // false positive.
  pred.add(2, 10, unit_box(6, 5));
  pred.add(2, 20, unit_box(5.5, 5));
  const EvalReport r = clear_metrics(gt, pred);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 0);
}

TEST(ClearMetrics, BoundaryOverlapCounts) {
  TrajectorySet gt;
  gt.add(1, 1, BoundingBox{0, 0, 10, 10});
  TrajectorySet pred;
  pred.add(1, 1, BoundingBox{0, 0, 10, 5});  // IoU exactly 0.5
  const EvalReport r = clear_metrics(gt, pred, 0.5);
  EXPECT_EQ(r.fn, 0);
  EXPECT_EQ(r.fp, 0);
  EXPECT_DOUBLE_EQ(r.mota, 1.0);
}

TEST(ClearMetrics, NoGroundTruth) {
  TrajectorySet pred;
  pred.add(1, 1, unit_box(5, 5));
  const EvalReport with_errors = clear_metrics(TrajectorySet{}, pred);
  EXPECT_EQ(with_errors.fp, 1);
  EXPECT_TRUE(std::isinf(with_errors.mota));
  EXPECT_LT(with_errors.mota, 0.0);
  const EvalReport vacuous = clear_metrics(TrajectorySet{}, TrajectorySet{});
  EXPECT_DOUBLE_EQ(vacuous.mota, 1.0);
}

TEST(IdMetrics, PerfectAndVacuousCases) {
  const TrajectorySet gt = one_track_ten_frames();
  const EvalReport perfect = id_metrics(gt, gt);
  EXPECT_DOUBLE_EQ(perfect.idf1, 1.0);
  EXPECT_EQ(perfect.idfp, 0);
  EXPECT_EQ(perfect.idfn, 0);
  EXPECT_EQ(perfect.idtp, 10);
  const EvalReport vacuous = id_metrics(TrajectorySet{}, TrajectorySet{});
  EXPECT_DOUBLE_EQ(vacuous.idf1, 1.0);
  const EvalReport nothing_found = id_metrics(gt, TrajectorySet{});
  EXPECT_DOUBLE_EQ(nothing_found.idf1, 0.0);
  EXPECT_EQ(nothing_found.idfn, 10);
}

TEST(IdMetrics, ThresholdValidation) {
  EXPECT_THROW(id_metrics(TrajectorySet{}, TrajectorySet{}, 0.0),
               std::invalid_argument);
  EXPECT_THROW(clear_metrics(TrajectorySet{}, TrajectorySet{}, 1.0),
               std::invalid_argument);
}

TrajectorySet random_scenario(std::mt19937& gen, int n_ids, int n_frames,
                              int id_offset) {
  std::uniform_real_distribution<double> pos(0.0, 30.0);
  std::bernoulli_distribution present(0.8);
  TrajectorySet t;
  for (int f = 1; f <= n_frames; ++f) {
    for (int id = 1; id <= n_ids; ++id) {
      if (!present(gen)) continue;
      t.add(f, id + id_offset, unit_box(pos(gen), pos(gen)));
    }
  }
  return t;
}

TEST(IdMetrics, MatchesExhaustiveSearchOnSmallScenarios) {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 60; ++trial) {
    const TrajectorySet gt = random_scenario(gen, 3, 6, 0);
    const TrajectorySet pred = random_scenario(gen, 3, 6, 100);
    const EvalReport r = id_metrics(gt, pred);

    // Exhaustive assignment of gt identities to distinct pred identities.
    std::vector<int> gt_ids;
    std::vector<int> pred_ids;
    std::map<int, std::map<int, long long>> overlap;
    for (const auto& [f, gts] : gt.frames) {
      const auto pit = pred.frames.find(f);
      if (pit == pred.frames.end()) continue;
      for (const auto& g : gts) {
        for (const auto& p : pit->second) {
          if (iou(g.box, p.box) >= 0.5) ++overlap[g.id][p.id];
        }
      }
    }
    for (const auto& [f, gts] : gt.frames) {
      for (const auto& g : gts) {
        if (std::find(gt_ids.begin(), gt_ids.end(), g.id) == gt_ids.end()) {
          gt_ids.push_back(g.id);
        }
      }
    }
    for (const auto& [f, ps] : pred.frames) {
      for (const auto& p : ps) {
        if (std::find(pred_ids.begin(), pred_ids.end(), p.id) ==
            pred_ids.end()) {
          pred_ids.push_back(p.id);
        }
      }
    }
    long long best = 0;
    std::vector<bool> used(pred_ids.size(), false);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t i,
                                                          long long acc) {
      if (i == gt_ids.size()) {
        best = std::max(best, acc);
        return;
      }
      rec(i + 1, acc);  // leave this gt identity unmatched
      for (std::size_t j = 0; j < pred_ids.size(); ++j) {
        if (used[j]) continue;
        long long o = 0;
        const auto git = overlap.find(gt_ids[i]);
        if (git != overlap.end()) {
          const auto pit = git->second.find(pred_ids[j]);
          if (pit != git->second.end()) o = pit->second;
        }
        used[j] = true;
        rec(i + 1, acc + o);
        used[j] = false;
      }
    };
    rec(0, 0);
    ASSERT_EQ(r.idtp, best) << "trial " << trial;
  }
}

TEST(Metrics, LabelInvariance) {
  std::mt19937 gen(37);
  const TrajectorySet gt = random_scenario(gen, 3, 6, 0);
  const TrajectorySet pred = random_scenario(gen, 3, 6, 0);
  TrajectorySet relabeled;
  const std::map<int, int> perm{{1, 12}, {2, 10}, {3, 11}};
  for (const auto& [f, list] : pred.frames) {
    for (const auto& p : list) {
      relabeled.add(f, perm.at(p.id), p.box, p.score);
    }
  }
  const EvalReport a = evaluate(gt, pred);
  const EvalReport b = evaluate(gt, relabeled);
  EXPECT_DOUBLE_EQ(a.mota, b.mota);
  EXPECT_DOUBLE_EQ(a.idf1, b.idf1);
  EXPECT_EQ(a.fp, b.fp);
  EXPECT_EQ(a.fn, b.fn);
  EXPECT_EQ(a.idsw, b.idsw);
  EXPECT_EQ(a.frag, b.frag);
  EXPECT_EQ(a.idtp, b.idtp);
}

TEST(Metrics, RelabeledPerfectPredictionStaysPerfect) {
  const TrajectorySet gt = one_track_ten_frames();
  TrajectorySet pred;
  for (const auto& [f, list] : gt.frames) {
    for (const auto& g : list) pred.add(f, g.id + 500, g.box);
  }
  const EvalReport r = evaluate(gt, pred);
  EXPECT_DOUBLE_EQ(r.mota, 1.0);
  EXPECT_DOUBLE_EQ(r.idf1, 1.0);
  EXPECT_EQ(r.idsw, 0);
}

TEST(Metrics, AddingFalsePositiveNeverImproves) {
  std::mt19937 gen(41);
  std::uniform_int_distribution<int> frame_pick(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    const TrajectorySet gt = random_scenario(gen, 3, 6, 0);
    const TrajectorySet pred = random_scenario(gen, 3, 6, 0);
    TrajectorySet worse = pred;
    worse.add(frame_pick(gen), 999, unit_box(1000.0, 1000.0));
    const EvalReport before = evaluate(gt, pred);
    const EvalReport after = evaluate(gt, worse);
    EXPECT_LE(after.mota, before.mota);
    EXPECT_LE(after.idf1, before.idf1);
  }
}

}  // namespace
}  // namespace sut
