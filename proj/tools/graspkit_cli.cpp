// Batch front end: scene generation, single pipeline episodes with artifact
// export, the paired benchmark, and config bootstrapping.
//
// Exit codes: 0 success, 1 usage/config/IO error, 2 adjudicated grasp failure.

#include "graspkit/benchmark.hpp"
#include "graspkit/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace graspkit;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int cmd_scene_generate(const std::string& templ, std::uint64_t seed,
                       const std::string& out_path) {
  const Scene scene = generate_scene(templ, seed);
  save_scene(scene, out_path);
  std::cout << "scene '" << templ << "' seed " << seed << " -> " << out_path
            << "\n";
  for (const SceneObject& obj : scene.objects) {
    std::cout << "  " << obj.id << (obj.is_target ? " [target]" : "") << "\n";
  }
  return 0;
}

int cmd_config_init(const std::string& out_path) {
  save_config(PipelineConfig{}, out_path);
  std::cout << "default config -> " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& scene_path, const std::string& target,
            const std::string& config_path, const std::string& mode_str,
            std::uint64_t seed, const std::string& export_dir) {
  const Scene scene = load_scene(scene_path);
  const PipelineConfig config =
      config_path.empty() ? PipelineConfig{} : load_config(config_path);
  const EpisodeMode mode = mode_from_string(mode_str);

  EpisodeArtifacts artifacts;
  TrialResult trial = run_episode(scene, target, config, mode, seed, &artifacts);
  trial.scenario = fs::path(scene_path).stem().string();
  trial.run = 1;

  if (!export_dir.empty()) {
    fs::create_directories(export_dir);
    const fs::path dir(export_dir);
    if (!artifacts.partial.empty()) save_ply(artifacts.partial, dir / "partial.ply");
    if (mode == EpisodeMode::Full) {
      if (!artifacts.mid.empty()) save_ply(artifacts.mid, dir / "mid.ply");
      if (!artifacts.complete.empty())
        save_ply(artifacts.complete, dir / "complete.ply");
    }
    write_text(dir / "grasps.json", grasps_to_json(artifacts));
    write_text(dir / "trial.json", trial_to_json(trial));
    write_text(dir / "fsm.log", fsm_log(trial));
    for (std::size_t i = 0; i < artifacts.frames.size(); ++i) {
      save_pfm(artifacts.frames[i].depth,
               dir / ("depth_" + std::to_string(i) + ".pfm"));
      save_pgm(artifacts.frames[i].mask,
               dir / ("mask_" + std::to_string(i) + ".pgm"));
    }
  }

  std::cout << (trial.success
                    ? "success"
                    : "failure (" +
                          (trial.failure_mode ? to_string(*trial.failure_mode)
                                              : std::string("?")) +
                          ")")
            << ", states: ";
  for (std::size_t i = 0; i < trial.states.size(); ++i)
    std::cout << (i ? " > " : "") << trial.states[i];
  std::cout << "\n";
  return trial.success ? 0 : 2;
}

int cmd_bench(const std::string& templates_csv, int pairs,
              const std::string& config_path, std::uint64_t seed,
              const std::string& out_prefix) {
  std::vector<std::string> templates;
  std::string cur;
  for (char c : templates_csv + ",") {
    if (c == ',') {
      if (!cur.empty()) templates.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }

  const PipelineConfig config =
      config_path.empty() ? PipelineConfig{} : load_config(config_path);
  const BenchResults results =
      run_paired_benchmark(templates, pairs, config, seed);

  write_text(out_prefix + ".csv", bench_to_csv(results));
  write_text(out_prefix + ".json", bench_to_json(results));
  write_text(out_prefix + ".txt", bench_to_table(results));
  std::cout << bench_to_table(results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grasp-synthesis pipeline: scenes, episodes, and benchmarks"};
  app.require_subcommand(1);

  // scene generate
  auto* scene_cmd = app.add_subcommand("scene", "scene file tools");
  scene_cmd->require_subcommand(1);
  auto* scene_gen = scene_cmd->add_subcommand("generate", "generate a seeded scene");
  std::string templ = "bottle";
  std::uint64_t scene_seed = 0;
  std::string scene_out = "scene.json";
  scene_gen->add_option("--template", templ, "drill or bottle")->required();
  scene_gen->add_option("--seed", scene_seed, "placement seed");
  scene_gen->add_option("--out", scene_out, "output scene JSON")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "run one pipeline episode");
  std::string scene_path, target, config_path, mode = "full", export_dir;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--scene", scene_path, "scene JSON")->required();
  run_cmd->add_option("--target", target, "target object label")->required();
  run_cmd->add_option("--config", config_path, "pipeline config JSON");
  run_cmd->add_option("--mode", mode, "full or baseline");
  run_cmd->add_option("--seed", run_seed, "episode seed");
  run_cmd->add_option("--export-dir", export_dir, "artifact export directory");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run the paired benchmark");
  std::string templates_csv = "drill,bottle", bench_out = "results";
  int pairs = 5;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--templates", templates_csv, "comma-separated templates");
  bench_cmd->add_option("--pairs", pairs, "scene/stance pairs per template");
  bench_cmd->add_option("--config", config_path, "pipeline config JSON");
  bench_cmd->add_option("--seed", bench_seed, "master seed");
  bench_cmd->add_option("--out", bench_out, "output prefix (csv/json/txt)");

  // config init
  auto* config_cmd = app.add_subcommand("config", "config file tools");
  config_cmd->require_subcommand(1);
  auto* config_init = config_cmd->add_subcommand("init", "write the default config");
  std::string config_out = "config.json";
  config_init->add_option("--out", config_out, "output config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (scene_gen->parsed()) return cmd_scene_generate(templ, scene_seed, scene_out);
    if (run_cmd->parsed())
      return cmd_run(scene_path, target, config_path, mode, run_seed, export_dir);
    if (bench_cmd->parsed())
      return cmd_bench(templates_csv, pairs, config_path, bench_seed, bench_out);
    if (config_init->parsed()) return cmd_config_init(config_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
