// Command-line front end: track, eval, simulate, stats.
//
// Exit codes: 0 success, 1 usage error, 2 input-format error, 3 numerical
// degeneracy. All file outputs go to explicitly named paths; logs and
// warnings go to standard error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sut/association.hpp"
#include "sut/errors.hpp"
#include "sut/io.hpp"
#include "sut/metrics.hpp"
#include "sut/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitNumerical = 3;

sut::Config resolve_config(const std::string& flag_path) {
  if (!flag_path.empty()) return sut::load_config(flag_path);
  if (const char* env = std::getenv("SUT_CONFIG"); env && *env) {
    return sut::load_config(env);
  }
  return {};
}

void apply_ablation_flags(sut::TrackerConfig& cfg, const std::string& motion,
                          const std::string& assoc) {
  if (motion == "ukf") {
    cfg.motion = sut::MotionModelKind::kUkf;
  } else if (motion == "kf") {
    cfg.motion = sut::MotionModelKind::kLinear;
  }
  if (assoc == "fishiou") {
    cfg.metric = sut::AssocMetric::kFishIou;
  } else if (assoc == "iou") {
    cfg.metric = sut::AssocMetric::kIou;
  } else if (assoc == "giou") {
    cfg.metric = sut::AssocMetric::kGiou;
  } else if (assoc == "diou") {
    cfg.metric = sut::AssocMetric::kDiou;
  }
}

struct TrackJob {
  std::string dets_path;
  std::string out_path;
  std::string emb_path;  // empty: none
};

std::mutex log_mutex;

/// Runs one sequence end to end; returns an exit code instead of throwing so
/// batch workers can keep going after a bad sequence.
int run_track_job(const TrackJob& job, const sut::Config& cfg) {
  try {
    sut::DetectionSet dets = sut::read_detections(job.dets_path);
    if (!job.emb_path.empty()) {
      if (cfg.tracker.reid_enabled) {
        const sut::EmbeddingTable emb = sut::read_embeddings(job.emb_path);
        sut::attach_embeddings(dets, emb);
      } else {
        const std::scoped_lock lock(log_mutex);
        std::cerr << "warning: embeddings given (" << job.emb_path
                  << ") but reid_enabled is false; ignoring them\n";
      }
    }

    sut::Tracker tracker(cfg.tracker);
    std::map<int, std::vector<sut::TrackOutput>> results;
    std::size_t n_dets = 0;
    for (const auto& [frame, list] : dets) {
      n_dets += list.size();
      auto out = tracker.step(frame, list);
      if (!out.empty()) results.emplace(frame, std::move(out));
    }
    sut::write_results(results, job.out_path);

    std::set<int> emitted;
    for (const auto& [frame, list] : results) {
      for (const auto& t : list) emitted.insert(t.id);
    }
    const int born = tracker.ids_issued();
    const int live = static_cast<int>(tracker.tracks().size());
    const std::scoped_lock lock(log_mutex);
    std::cerr << job.dets_path << ": frames=" << dets.size()
              << " detections=" << n_dets << " tracks_born=" << born
              << " tracks_emitted=" << emitted.size()
              << " tracks_removed=" << born - live << " -> " << job.out_path
              << "\n";
    return kExitOk;
  } catch (const sut::NumericalError& e) {
    const std::scoped_lock lock(log_mutex);
    std::cerr << "error: " << job.dets_path << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sut::FormatError& e) {
    const std::scoped_lock lock(log_mutex);
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    const std::scoped_lock lock(log_mutex);
    std::cerr << "error: " << job.dets_path << ": " << e.what() << "\n";
    return kExitFormat;
  }
}

int cmd_track(const std::vector<std::string>& dets,
              const std::vector<std::string>& outs,
              const std::vector<std::string>& embs,
              const std::string& config_path, const std::string& motion,
              const std::string& assoc, int jobs) {
  sut::Config cfg = resolve_config(config_path);
  apply_ablation_flags(cfg.tracker, motion, assoc);

  std::vector<TrackJob> queue;
  queue.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    queue.push_back({dets[i], outs[i], embs.empty() ? "" : embs[i]});
  }

  std::vector<int> codes(queue.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queue.size()) return;
      codes[i] = run_track_job(queue[i], cfg);
    }
  };

  const int n_workers = std::max(
      1, std::min(jobs, static_cast<int>(queue.size())));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return codes.empty() ? kExitOk
                       : *std::max_element(codes.begin(), codes.end());
}

int cmd_eval(const std::string& gt_path, const std::string& pred_path,
             double iou) {
  const sut::TrajectorySet gt = sut::read_gt(gt_path);
  const sut::TrajectorySet pred = sut::read_results(pred_path);
  const sut::EvalReport r = sut::evaluate(gt, pred, iou);

  char buf[64];
  const auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  std::printf("%-10s %s\n", "metric", "value");
  std::printf("%-10s %s\n", "MOTA", num(r.mota).c_str());
  std::printf("%-10s %s\n", "IDF1", num(r.idf1).c_str());
  std::printf("%-10s %s\n", "IDP", num(r.idp).c_str());
  std::printf("%-10s %s\n", "IDR", num(r.idr).c_str());
  std::printf("%-10s %lld\n", "FP", r.fp);
  std::printf("%-10s %lld\n", "FN", r.fn);
  std::printf("%-10s %lld\n", "IDSW", r.idsw);
  std::printf("%-10s %lld\n", "Frag", r.frag);
  std::printf("%-10s %lld\n", "IDTP", r.idtp);
  std::printf("%-10s %lld\n", "IDFP", r.idfp);
  std::printf("%-10s %lld\n", "IDFN", r.idfn);
  std::printf("%-10s %lld\n", "GT", r.gt_count);
  std::printf(
      "metric_csv_header:mota,idf1,idp,idr,fp,fn,idsw,frag,idtp,idfp,idfn,"
      "gt\n");
  std::printf("metric_csv:%s,%s,%s,%s,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld\n",
              num(r.mota).c_str(), num(r.idf1).c_str(), num(r.idp).c_str(),
              num(r.idr).c_str(), r.fp, r.fn, r.idsw, r.frag, r.idtp, r.idfp,
              r.idfn, r.gt_count);
  return kExitOk;
}

double series_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

int cmd_simulate(const std::string& config_path, const std::string& gt_path,
                 const std::string& dets_path) {
  const sut::Config cfg = resolve_config(config_path);
  const sut::TrajectorySet gt = sut::simulate(cfg.sim);
  const sut::DetectionSet dets = sut::corrupt(gt, cfg.sim);
  sut::write_gt(gt, gt_path);
  sut::write_detections(dets, dets_path);

  const sut::KinematicStats stats = sut::kinematic_stats(gt);
  char line[160];
  std::snprintf(line, sizeof(line),
                "simulated fish=%d frames=%d mean_speed=%.9f "
                "mean_abs_turn=%.9f\n",
                cfg.sim.n_fish, cfg.sim.n_frames,
                series_mean(stats.mean_speed),
                series_mean(stats.mean_abs_turn));
  std::cerr << line;
  return kExitOk;
}

int cmd_stats(const std::string& gt_path, int bins,
              const std::string& out_path) {
  const sut::TrajectorySet gt = sut::read_gt(gt_path);
  const sut::KinematicStats stats = sut::kinematic_stats(gt, bins);

  std::string text = "frame,mean_speed,mean_abs_angular_velocity\n";
  std::map<int, double> turn_by_frame;
  for (std::size_t i = 0; i < stats.turn_frames.size(); ++i) {
    turn_by_frame[stats.turn_frames[i]] = stats.mean_abs_turn[i];
  }
  char line[128];
  for (std::size_t i = 0; i < stats.speed_frames.size(); ++i) {
    const int frame = stats.speed_frames[i];
    const auto it = turn_by_frame.find(frame);
    if (it != turn_by_frame.end()) {
      std::snprintf(line, sizeof(line), "%d,%.12g,%.12g\n", frame,
                    stats.mean_speed[i], it->second);
    } else {
      std::snprintf(line, sizeof(line), "%d,%.12g,nan\n", frame,
                    stats.mean_speed[i]);
    }
    text += line;
  }
  if (!gt.empty()) {
    text += "\ndirection_histogram\nbin,low,high,count\n";
    const double width = 2.0 * M_PI / static_cast<double>(bins);
    for (std::size_t i = 0; i < stats.direction_histogram.size(); ++i) {
      const double low = -M_PI + static_cast<double>(i) * width;
      std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%lld\n", i, low,
                    low + width, stats.direction_histogram[i]);
      text += line;
    }
  }

  if (out_path.empty()) {
    std::cout << text;
  } else {
    auto out = sut::detail::open_output(out_path);
    out << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fish multi-object tracker: track, evaluate, simulate"};
  app.require_subcommand(1);

  const auto unit_interval = CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        try {
          v = std::stod(s);
        } catch (...) {
          return "not a number: " + s;
        }
        if (!(v > 0.0 && v < 1.0)) return "must lie strictly in (0, 1)";
        return "";
      },
      "FLOAT in (0,1)", "unit_interval");

  // track
  auto* track = app.add_subcommand(
      "track", "Run the tracker over detection files, write MOT results");
  std::vector<std::string> dets_paths;
  std::vector<std::string> out_paths;
  std::vector<std::string> emb_paths;
  std::string config_path;
  std::string motion_flag;
  std::string assoc_flag;
  int jobs = 1;
  track->add_option("--dets", dets_paths, "detection file (repeat per sequence)")
      ->required();
  track->add_option("--out", out_paths, "result file (one per --dets)")
      ->required();
  track->add_option("--emb", emb_paths,
                    "embedding sidecar (none, or one per --dets)");
  track->add_option("--config", config_path, "configuration file");
  track->add_option("--motion", motion_flag, "motion model override")
      ->check(CLI::IsMember({"ukf", "kf"}));
  track->add_option("--assoc", assoc_flag, "association metric override")
      ->check(CLI::IsMember({"fishiou", "iou", "giou", "diou"}));
  track->add_option("--jobs", jobs, "parallel workers for batch runs")
      ->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Score a result file against annotations");
  std::string gt_path;
  std::string pred_path;
  double iou_threshold = 0.5;
  eval->add_option("--gt", gt_path, "annotation file")->required();
  eval->add_option("--pred", pred_path, "result file")->required();
  eval->add_option("--iou", iou_threshold, "match threshold (default 0.5)")
      ->check(unit_interval);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic sequence and corrupted detections");
  std::string sim_config;
  std::string sim_gt_out;
  std::string sim_dets_out;
  simulate->add_option("--config", sim_config, "configuration file");
  simulate->add_option("--gt", sim_gt_out, "annotation output file")
      ->required();
  simulate->add_option("--dets", sim_dets_out, "detection output file")
      ->required();

  // stats
  auto* stats = app.add_subcommand(
      "stats", "Kinematic series and direction histogram of an annotation file");
  std::string stats_gt;
  std::string stats_out;
  int bins = 16;
  stats->add_option("--gt", stats_gt, "annotation file")->required();
  stats->add_option("--bins", bins, "direction histogram bins (default 16)")
      ->check(CLI::PositiveNumber);
  stats->add_option("--out", stats_out, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (track->parsed()) {
    if (out_paths.size() != dets_paths.size()) {
      std::cerr << "usage error: need exactly one --out per --dets\n";
      return kExitUsage;
    }
    if (!emb_paths.empty() && emb_paths.size() != dets_paths.size()) {
      std::cerr << "usage error: --emb must be absent or given once per "
                   "--dets\n";
      return kExitUsage;
    }
  }

  try {
    if (track->parsed()) {
      return cmd_track(dets_paths, out_paths, emb_paths, config_path,
                       motion_flag, assoc_flag, jobs);
    }
    if (eval->parsed()) return cmd_eval(gt_path, pred_path, iou_threshold);
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, sim_gt_out, sim_dets_out);
    }
    if (stats->parsed()) return cmd_stats(stats_gt, bins, stats_out);
  } catch (const sut::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sut::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}
