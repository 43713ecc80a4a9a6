// Copyright 2026 The wasabi-planar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: demo-gen, train, eval, analyze, ablate.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wasabi/wasabi.hpp"

#ifndef WASABI_BUILD_ID
#define WASABI_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wasabi;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Relative output paths live under $WASABI_OUT_ROOT when it is set.
fs::path resolve_out(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* root = std::getenv("WASABI_OUT_ROOT"); root && *root) return fs::path(root) / path;
  }
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

// Options shared by train and ablate. Command-line values are appended to the
// config text, so they win over the file and select presets the same way.
struct ConfigOptions {
  std::string file;
  std::string task;
  std::string loss;
  std::size_t horizon = 0;
  std::size_t iterations = 0;
  std::string seeds;
  std::string references;
  std::size_t workers = 0;
  std::vector<std::string> sets;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", file, "Config file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--task", task, "leap|wave|standup|backflip");
    cmd->add_option("--loss", loss, "Discriminator objective: wgan|lsgan");
    cmd->add_option("--horizon", horizon, "Discriminator observation horizon H");
    cmd->add_option("--iterations", iterations, "Learning iterations");
    cmd->add_option("--seeds", seeds, "Comma-separated seed list");
    cmd->add_option("--references", references, "Reference CSV file or directory");
    cmd->add_option("--workers", workers, "Simulation worker threads");
    cmd->add_option("--set", sets, "Extra key=value override (repeatable)");
  }

  std::string text() const {
    std::string t = file.empty() ? "" : read_text(file) + "\n";
    if (!task.empty()) t += "task = " + task + "\n";
    if (!loss.empty()) t += "disc.loss = " + loss + "\n";
    if (horizon) t += "disc.horizon = " + std::to_string(horizon) + "\n";
    if (iterations) t += "train.iterations = " + std::to_string(iterations) + "\n";
    if (!seeds.empty()) t += "train.seeds = " + seeds + "\n";
    if (!references.empty()) t += "train.references = " + references + "\n";
    if (workers) t += "train.num_workers = " + std::to_string(workers) + "\n";
    for (const auto& s : sets) t += s + "\n";
    return t;
  }
};

void append_metrics(const fs::path& path, const IterationMetrics& m) {
  std::ofstream out(path, std::ios::app);
  out << m.to_json().dump() << '\n';
}

// Drops metric records past `iteration` so a resumed run continues the file.
void truncate_metrics(const fs::path& path, std::size_t iteration) {
  if (!fs::exists(path)) return;
  std::stringstream in(read_text(path));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (json::parse(line).at("iteration").get<std::size_t>() <= iteration) kept += line + "\n";
  }
  write_text(path, kept);
}

void save_checkpoint(const Trainer& t, const fs::path& run_dir) {
  const std::string text = t.checkpoint().dump();
  write_text(run_dir / "checkpoints" / ("iter_" + std::to_string(t.iteration()) + ".json"), text);
  write_text(run_dir / "checkpoints" / "latest.json", text);
}

json dtw_json(const DtwReport& r) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < r.distances.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.distances.cols()));
    for (Eigen::Index j = 0; j < r.distances.cols(); ++j) row[static_cast<std::size_t>(j)] = r.distances(i, j);
    rows.push_back(row);
  }
  return {{"mean", r.mean}, {"std", r.stddev}, {"termination_rate", r.termination_rate}, {"distances", rows}};
}

json evaluate(const Trainer& t, std::size_t n_seeds, std::size_t rollouts, const ReferenceDataset& refs) {
  const auto& cfg = t.config();
  const double scale = cfg.ppo.action_scale;
  json report;
  report["task"] = motion_name(cfg.task);
  report["loss"] = loss_kind_name(cfg.disc.loss_kind);
  report["iteration"] = t.iteration();
  report["build"] = WASABI_BUILD_ID;
  json per_seed = json::array();
  std::vector<double> means, hand;
  for (std::size_t k = 0; k < n_seeds; ++k) {
    const DtwReport r = evaluate_policy_dtw(mean_action(t.policy()), t.context(), scale, refs, rollouts,
                                            cfg.eval_references, 1000 + k);
    json entry = dtw_json(r);
    entry["seed"] = 1000 + k;
    means.push_back(r.mean);
    if (has_handcrafted_reward(cfg.task)) {
      const auto h = evaluate_handcrafted(mean_action(t.policy()), t.context(), scale, cfg.task, rollouts,
                                          handcrafted_frames(cfg.task), 2000 + k);
      entry["handcrafted"] = {{"mean", h.mean}, {"std", h.stddev}};
      hand.push_back(h.mean);
    }
    per_seed.push_back(entry);
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0, s = 0.0;
    for (double x : v) m += x / static_cast<double>(v.size());
    for (double x : v) s += (x - m) * (x - m) / static_cast<double>(v.size());
    return json{{"mean", m}, {"std", std::sqrt(s)}};
  };
  report["evaluations"] = per_seed;
  report["dtw"] = mean_std(means);
  if (!hand.empty()) report["handcrafted"] = mean_std(hand);
  const DtwReport base =
      evaluate_policy_dtw(stand_still(), t.context(), scale, refs, rollouts, cfg.eval_references, 1000);
  report["stand_still"] = {{"mean", base.mean}, {"std", base.stddev}};
  report["config"] = serialize_config(cfg);
  return report;
}

// Trains one seed into `run_dir`, optionally continuing from a checkpoint.
Trainer run_seed(Trainer t, const fs::path& run_dir, std::size_t log_every, bool fresh) {
  const auto& cfg = t.config();
  const fs::path metrics = run_dir / "metrics.jsonl";
  if (fresh) {
    fs::create_directories(run_dir);
    write_text(run_dir / "config.txt", serialize_config(cfg));
    write_text(run_dir / "seed.txt", std::to_string(t.seed()) + "\n");
    write_text(run_dir / "build.txt", std::string(WASABI_BUILD_ID) + "\n");
    std::ostringstream refs;
    write_reference_csv(refs, t.references());
    write_text(run_dir / "references.csv", refs.str());
    write_text(metrics, "");
    save_checkpoint(t, run_dir);
  } else {
    truncate_metrics(metrics, t.iteration());
  }
  while (t.iteration() < cfg.iterations) {
    const IterationMetrics m = t.iterate();
    append_metrics(metrics, m);
    if (log_every && (m.iteration % log_every == 0 || m.iteration == cfg.iterations)) {
      std::cerr << "[seed " << t.seed() << "] iter " << m.iteration << " reward " << m.mean_reward
                << " imitation " << m.mean_imitation << " disc_loss " << m.disc_loss << " kl " << m.kl
                << " lr " << m.learning_rate << '\n';
    }
    if (cfg.checkpoint_interval && m.iteration % cfg.checkpoint_interval == 0) save_checkpoint(t, run_dir);
  }
  save_checkpoint(t, run_dir);
  return t;
}

int cmd_demo_gen(const std::string& motion, std::uint64_t seed, std::size_t count, const std::string& out,
                 bool single_file, bool no_noise, double height_offset) {
  SimParams p;
  DemoOptions opt;
  opt.noise = !no_noise;
  opt.height_offset = height_offset;
  std::mt19937_64 rng(seed);
  const ReferenceDataset ds = generate_demo_dataset(motion_from_name(motion), count, standing_height(p), rng, opt);
  const fs::path dir = resolve_out(out);
  if (single_file) {
    std::ostringstream os;
    write_reference_csv(os, ds);
    write_text(dir / (motion + ".csv"), os.str());
    std::cout << "wrote " << (dir / (motion + ".csv")).string() << '\n';
  } else {
    const auto paths = write_reference_files(dir, ds);
    std::cout << "wrote " << paths.size() << " files to " << dir.string() << '\n';
  }
  return 0;
}

int cmd_train(const ConfigOptions& co, const std::string& out, const std::string& resume, std::size_t log_every) {
  if (!resume.empty()) {
    const fs::path ckpt = resume;
    Trainer t = Trainer::restore(read_json(ckpt));
    TrainConfig cfg = t.config();
    const fs::path run_dir = ckpt.parent_path().parent_path();
    if (co.iterations && co.iterations != cfg.iterations) {
      std::cerr << "resume keeps the checkpoint config; use --set in a fresh run to change it\n";
    }
    t = run_seed(std::move(t), run_dir, log_every, false);
    write_text(run_dir / "eval.json",
               evaluate(t, 1, cfg.eval_rollouts, t.references()).dump(2));
    return 0;
  }
  const TrainConfig cfg = parse_config(co.text());
  const fs::path root = resolve_out(out.empty() ? cfg.output_dir : out);
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path run_dir = root / ("seed_" + std::to_string(seed));
    Trainer t(cfg, make_references(cfg, seed + 7919), seed);
    t = run_seed(std::move(t), run_dir, log_every, true);
    const json rep = evaluate(t, 1, cfg.eval_rollouts, t.references());
    write_text(run_dir / "eval.json", rep.dump(2));
    std::cout << "seed " << seed << ": dtw " << rep["dtw"]["mean"].get<double>() << " (stand still "
              << rep["stand_still"]["mean"].get<double>() << ")";
    if (rep.contains("handcrafted")) std::cout << ", handcrafted " << rep["handcrafted"]["mean"].get<double>();
    std::cout << "  -> " << run_dir.string() << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& references, std::size_t rollouts, std::size_t seeds,
             const std::string& out, const std::string& alignment) {
  const Trainer t = Trainer::restore(read_json(ckpt));
  const ReferenceDataset refs =
      references.empty() ? t.references() : load_reference_dataset(references, t.config().disc.horizon);
  const json rep = evaluate(t, seeds, rollouts, refs);
  if (out.empty()) {
    std::cout << rep.dump(2) << '\n';
  } else {
    write_text(resolve_out(out), rep.dump(2));
    std::cout << "dtw " << rep["dtw"]["mean"].get<double>() << " +- " << rep["dtw"]["std"].get<double>()
              << " (stand still " << rep["stand_still"]["mean"].get<double>() << ")\n";
  }
  if (!alignment.empty()) {
    std::mt19937_64 rng(1000);
    const auto ro = run_rollout(mean_action(t.policy()), t.context(), t.config().ppo.action_scale,
                                refs.trajectories.front().size(), rng);
    const auto res = dtw_distance(to_feature_sequence(ro.observations), to_feature_sequence(refs.trajectories.front()));
    std::ostringstream os;
    os << "query_index,reference_index,local_cost\n";
    for (const auto& s : res.alignment) {
      os << s.query_index << ',' << s.reference_index << ',' << detail::format_double(s.local_cost) << '\n';
    }
    write_text(resolve_out(alignment), os.str());
  }
  return 0;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto c = s.find(',');
  if (c == std::string::npos) throw CLI::ValidationError("range", "expected lo,hi");
  const double lo = std::stod(s.substr(0, c)), hi = std::stod(s.substr(c + 1));
  if (!(hi > lo)) throw CLI::ValidationError("range", "expected lo < hi");
  return {lo, hi};
}

std::string histogram_rows(const std::string& source, const std::vector<double>& v, double lo, double hi,
                           std::size_t bins) {
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    const auto b = static_cast<std::ptrdiff_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(bins)));
    counts[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1))]++;
  }
  std::ostringstream os;
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    const double e = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
    os << source << ',' << detail::format_double(a) << ',' << detail::format_double(e) << ',' << counts[b] << '\n';
  }
  return os.str();
}

int cmd_analyze(const std::string& ckpt, std::size_t grid, const std::string& pr_range, const std::string& h_range,
                std::size_t bins, const std::string& out) {
  if (grid < 2) throw CLI::ValidationError("--grid", "needs at least 2 points per axis");
  const Trainer t = Trainer::restore(read_json(ckpt));
  const auto& cfg = t.config();
  const Discriminator& d = t.discriminator();
  const RunningStats& stats = t.stats();
  const auto [pr_lo, pr_hi] = parse_range(pr_range);
  const auto [h_lo, h_hi] = parse_range(h_range);
  const std::size_t fd = frame_dim(cfg.disc.full_state), H = cfg.disc.horizon;
  const fs::path dir = resolve_out(out);

  // Frame of dataset means; the sweep varies pitch rate and height in every
  // frame of the window.
  Eigen::VectorXd mean_frame = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fd));
  std::size_t n = 0;
  std::vector<double> f;
  const auto& refs = t.references();
  for (std::size_t k = 0; k < refs.trajectories.size(); ++k) {
    for (std::size_t i = 0; i < refs.trajectories[k].size(); ++i) {
      f.clear();
      refs.append_frame(k, i, cfg.disc.full_state, f);
      mean_frame += Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(fd));
      ++n;
    }
  }
  mean_frame /= static_cast<double>(n);
  Eigen::MatrixXd windows(static_cast<Eigen::Index>(fd * H), static_cast<Eigen::Index>(grid * grid));
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      Eigen::VectorXd frame = mean_frame;
      frame(2) = pr_lo + (pr_hi - pr_lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
      frame(5) = h_lo + (h_hi - h_lo) * static_cast<double>(j) / static_cast<double>(grid - 1);
      for (std::size_t h = 0; h < H; ++h) {
        windows.block(static_cast<Eigen::Index>(h * fd), static_cast<Eigen::Index>(i * grid + j),
                      static_cast<Eigen::Index>(fd), 1) = frame;
      }
    }
  }
  const Eigen::VectorXd scores = d.scores(windows);
  auto reward_of = [&](double s) { return imitation_signal(s, cfg.disc.loss_kind, stats); };
  std::ostringstream surf;
  surf << "pitch_rate,height,score,reward\n";
  std::vector<double> grid_rewards;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const auto c = static_cast<Eigen::Index>(i * grid + j);
      const double r = reward_of(scores(c));
      grid_rewards.push_back(r);
      surf << detail::format_double(windows(2, c)) << ',' << detail::format_double(windows(5, c)) << ','
           << detail::format_double(scores(c)) << ',' << detail::format_double(r) << '\n';
    }
  }
  write_text(dir / "reward_surface.csv", surf.str());

  // Reward distributions: one rollout batch of the stochastic policy and an
  // equal number of reference windows.
  std::vector<EnvSlot> envs = t.envs();
  RunningStats scratch_stats = stats;
  RolloutBuffer buf;
  collect_rollout(envs, t.policy(), d, scratch_stats, cfg.reward, cfg.ppo, t.context(), buf, cfg.num_workers);
  std::vector<double> pol(buf.scores.size()), ref;
  for (Eigen::Index k = 0; k < buf.scores.size(); ++k) pol[static_cast<std::size_t>(k)] = reward_of(buf.scores(k));
  std::mt19937_64 rng(17);
  const auto rw = sample_reference_windows(refs, pol.size(), H, rng, cfg.disc.full_state);
  const Eigen::VectorXd ref_scores = d.scores(windows_to_matrix(rw));
  for (Eigen::Index k = 0; k < ref_scores.size(); ++k) ref.push_back(reward_of(ref_scores(k)));
  double lo = std::min(*std::min_element(pol.begin(), pol.end()), *std::min_element(ref.begin(), ref.end()));
  double hi = std::max(*std::max_element(pol.begin(), pol.end()), *std::max_element(ref.begin(), ref.end()));
  if (!(hi > lo)) hi = lo + 1.0;
  write_text(dir / "reward_histogram.csv", "source,bin_lo,bin_hi,count\n" + histogram_rows("policy", pol, lo, hi, bins) +
                                               histogram_rows("reference", ref, lo, hi, bins));

  std::vector<double> sorted = grid_rewards;
  std::sort(sorted.begin(), sorted.end());
  const double p90 = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1))];
  const double above = static_cast<double>(std::count_if(ref.begin(), ref.end(), [&](double r) { return r > p90; })) /
                       static_cast<double>(ref.size());
  const double floor_frac =
      static_cast<double>(std::count(pol.begin(), pol.end(), 0.0)) / static_cast<double>(pol.size());
  json summary = {{"grid", grid},
                  {"rows", grid * grid},
                  {"loss", loss_kind_name(cfg.disc.loss_kind)},
                  {"grid_reward_p90", p90},
                  {"reference_above_grid_p90", above},
                  {"policy_reward_at_zero", floor_frac}};
  write_text(dir / "summary.json", summary.dump(2));
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_ablate(const ConfigOptions& co, const std::string& horizons_s, const std::string& losses_s,
               const std::string& out, std::size_t log_every) {
  std::vector<std::size_t> horizons;
  for (const auto& h : config_detail::split_list(horizons_s)) horizons.push_back(config_detail::to_u64(h));
  if (horizons.empty()) throw CLI::ValidationError("--horizons", "needs at least one horizon");
  const auto losses = config_detail::split_list(losses_s);
  if (losses.empty()) throw CLI::ValidationError("--losses", "needs at least one loss");
  const TrainConfig base = parse_config(co.text());
  const fs::path root = resolve_out(out.empty() ? base.output_dir + "_ablation" : out);
  std::ostringstream curves, summary;
  curves << "loss,horizon,seed,iteration,mean_reward,mean_imitation_reward,disc_loss\n";
  summary << "loss,horizon,seed,dtw_mean,dtw_std,stand_still,handcrafted\n";
  for (const auto& loss : losses) {
    for (std::size_t h : horizons) {
      ConfigOptions run = co;
      run.loss = loss;
      run.horizon = h;
      const TrainConfig cfg = parse_config(run.text());
      const std::string tag = loss + "_H" + std::to_string(h);
      for (std::uint64_t seed : cfg.seeds) {
        const fs::path run_dir = root / tag / ("seed_" + std::to_string(seed));
        Trainer t(cfg, make_references(cfg, seed + 7919), seed);
        t = run_seed(std::move(t), run_dir, log_every, true);
        const json rep = evaluate(t, 1, cfg.eval_rollouts, t.references());
        write_text(run_dir / "eval.json", rep.dump(2));
        std::stringstream ms(read_text(run_dir / "metrics.jsonl"));
        std::string line;
        while (std::getline(ms, line)) {
          if (line.empty()) continue;
          const json m = json::parse(line);
          curves << loss << ',' << h << ',' << seed << ',' << m["iteration"].get<std::size_t>() << ','
                 << detail::format_double(m["mean_reward"].get<double>()) << ','
                 << detail::format_double(m["mean_imitation_reward"].get<double>()) << ','
                 << detail::format_double(m["disc_loss"].get<double>()) << '\n';
        }
        summary << loss << ',' << h << ',' << seed << ',' << detail::format_double(rep["dtw"]["mean"].get<double>())
                << ',' << detail::format_double(rep["dtw"]["std"].get<double>()) << ','
                << detail::format_double(rep["stand_still"]["mean"].get<double>()) << ','
                << (rep.contains("handcrafted") ? detail::format_double(rep["handcrafted"]["mean"].get<double>()) : "")
                << '\n';
        std::cout << tag << " seed " << seed << ": dtw " << rep["dtw"]["mean"].get<double>() << '\n';
      }
    }
  }
  write_text(root / "curves.csv", curves.str());
  write_text(root / "summary.csv", summary.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WASABI: adversarial imitation from rough base-only demonstrations (planar)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(WASABI_BUILD_ID));

  auto* demo = app.add_subcommand("demo-gen", "Write rough reference demonstrations as CSV");
  std::string motion, demo_out;
  std::uint64_t demo_seed = 0;
  std::size_t demo_count = 20;
  bool single_file = false, no_noise = false;
  double height_offset = 0.0;
  demo->add_option("--motion", motion, "leap|wave|standup|backflip")
      ->required()
      ->check(CLI::IsMember({"leap", "wave", "standup", "backflip"}));
  demo->add_option("--seed", demo_seed, "Generator seed");
  demo->add_option("--count", demo_count, "Number of trajectories")->check(CLI::PositiveNumber);
  demo->add_option("--out", demo_out, "Output directory")->required();
  demo->add_flag("--single-file", single_file, "One multi-trajectory CSV instead of one file each");
  demo->add_flag("--no-noise", no_noise, "Exact scripts without jitter");
  demo->add_option("--height-offset", height_offset, "Demonstrator height offset (m)");

  auto* train = app.add_subcommand("train", "Run adversarial imitation training");
  ConfigOptions train_opts;
  train_opts.add_to(train);
  std::string train_out, resume;
  std::size_t log_every = 100;
  train->add_option("--out", train_out, "Run directory (one seed_<n> subdirectory per seed)");
  train->add_option("--resume", resume, "Continue from a checkpoint file")->check(CLI::ExistingFile);
  train->add_option("--log-every", log_every, "Progress line interval (0 = silent)");

  auto* eval = app.add_subcommand("eval", "DTW and handcrafted-reward report for a checkpoint");
  std::string eval_ckpt, eval_refs, eval_out, alignment;
  std::size_t eval_rollouts = 20, eval_seeds = 1;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--references", eval_refs, "Reference CSV file or directory (default: training set)");
  eval->add_option("--rollouts", eval_rollouts, "Rollouts per evaluation")->check(CLI::PositiveNumber);
  eval->add_option("--seeds", eval_seeds, "Independent evaluations")->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Report path (default: stdout)");
  eval->add_option("--alignment", alignment, "Write one DTW alignment as CSV");

  auto* analyze = app.add_subcommand("analyze", "Reward surface and reward histograms");
  std::string an_ckpt, an_out = "analysis", pr_range = "-6,6", h_range = "0.05,0.7";
  std::size_t grid = 101, bins = 50;
  analyze->add_option("--checkpoint", an_ckpt, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--grid", grid, "Points per axis");
  analyze->add_option("--pitch-rate-range", pr_range, "lo,hi in rad/s");
  analyze->add_option("--height-range", h_range, "lo,hi in m");
  analyze->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze->add_option("--out", an_out, "Output directory");

  auto* ablate = app.add_subcommand("ablate", "Horizon x loss sweep of train + eval");
  ConfigOptions ablate_opts;
  ablate_opts.add_to(ablate);
  std::string horizons = "2,4,8", losses = "wgan,lsgan", ablate_out;
  ablate->add_option("--horizons", horizons, "Comma-separated horizons");
  ablate->add_option("--losses", losses, "Comma-separated losses");
  ablate->add_option("--out", ablate_out, "Sweep directory");
  ablate->add_option("--log-every", log_every, "Progress line interval (0 = silent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*demo) return cmd_demo_gen(motion, demo_seed, demo_count, demo_out, single_file, no_noise, height_offset);
    if (*train) return cmd_train(train_opts, train_out, resume, log_every);
    if (*eval) return cmd_eval(eval_ckpt, eval_refs, eval_rollouts, eval_seeds, eval_out, alignment);
    if (*analyze) return cmd_analyze(an_ckpt, grid, pr_range, h_range, bins, an_out);
    if (*ablate) return cmd_ablate(ablate_opts, horizons, losses, ablate_out, log_every);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::kConfig) return kExitConfig;
    if (e.code() == ErrorCode::kInvalidArgument && std::string(e.what()).find("unknown") == 0) return kExitUsage;
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
