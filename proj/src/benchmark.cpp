#include "graspkit/benchmark.hpp"

#include <json.hpp>

#include <sstream>

namespace graspkit {

using nlohmann::ordered_json;

std::size_t BenchResults::successes(EpisodeMode mode) const {
  std::size_t n = 0;
  for (const TrialResult& t : trials) n += t.mode == mode && t.success;
  return n;
}

std::size_t BenchResults::count(EpisodeMode mode) const {
  std::size_t n = 0;
  for (const TrialResult& t : trials) n += t.mode == mode;
  return n;
}

BenchResults run_paired_benchmark(const std::vector<std::string>& templates,
                                  int pairs, const PipelineConfig& config,
                                  std::uint64_t master_seed) {
  if (templates.empty())
    throw std::invalid_argument("benchmark: no templates");
  if (pairs < 1)
    throw std::invalid_argument("benchmark: pairs must be at least 1");
  config.validate();

  const std::size_t total_pairs = templates.size() * static_cast<std::size_t>(pairs);
  BenchResults results;
  results.trials.resize(total_pairs * 2);

  const Rng master(master_seed);
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t slot = 0; slot < static_cast<std::int64_t>(total_pairs);
       ++slot) {
    try {
      const std::size_t ti = static_cast<std::size_t>(slot) /
                             static_cast<std::size_t>(pairs);
      const int pair = static_cast<int>(slot % pairs);
      const std::string& templ = templates[ti];

      const Rng pair_rng = master.fork(ti).fork(static_cast<std::uint64_t>(pair));
      const std::uint64_t scene_seed = pair_rng.fork(0).next();
      const std::uint64_t episode_seed = pair_rng.fork(1).next();

      const Scene scene = generate_scene(templ, scene_seed);

      for (int m = 0; m < 2; ++m) {
        const EpisodeMode mode = m == 0 ? EpisodeMode::Full : EpisodeMode::Baseline;
        TrialResult trial =
            run_episode(scene, templ, config, mode, episode_seed);
        trial.scenario = templ;
        trial.run = pair + 1;
        results.trials[static_cast<std::size_t>(slot) * 2 + m] = std::move(trial);
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::string bench_to_csv(const BenchResults& results) {
  std::ostringstream out;
  out << "scenario,run,mode,success,failure_mode\n";
  for (const TrialResult& t : results.trials) {
    out << t.scenario << ',' << t.run << ',' << to_string(t.mode) << ','
        << (t.success ? "true" : "false") << ','
        << (t.failure_mode ? to_string(*t.failure_mode) : "") << '\n';
  }
  return out.str();
}

std::string bench_to_json(const BenchResults& results) {
  ordered_json rows = ordered_json::array();
  for (const TrialResult& t : results.trials) {
    ordered_json j;
    j["scenario"] = t.scenario;
    j["run"] = t.run;
    j["mode"] = to_string(t.mode);
    j["success"] = t.success;
    j["failure_mode"] = t.failure_mode
                            ? ordered_json(to_string(*t.failure_mode))
                            : ordered_json(nullptr);
    j["seed"] = t.seed;
    rows.push_back(j);
  }
  ordered_json j;
  j["rows"] = rows;
  for (EpisodeMode mode : {EpisodeMode::Full, EpisodeMode::Baseline}) {
    j["totals"][to_string(mode)]["successes"] = results.successes(mode);
    j["totals"][to_string(mode)]["trials"] = results.count(mode);
  }
  return j.dump(2) + "\n";
}

std::string bench_to_table(const BenchResults& results) {
  std::ostringstream out;
  out << "Scenario  Run  Object        Full Pipeline      Baseline (View-Dependent)\n";
  out << "--------------------------------------------------------------------------\n";

  // Pairs are adjacent (full, baseline).
  for (std::size_t i = 0; i + 1 < results.trials.size(); i += 2) {
    const TrialResult& full = results.trials[i];
    const TrialResult& base = results.trials[i + 1];
    auto cell = [](const TrialResult& t) {
      if (t.success) return std::string("ok");
      return "FAIL(" + (t.failure_mode ? to_string(*t.failure_mode)
                                       : std::string("?")) +
             ")";
    };
    out << full.scenario << "  " << full.run << "  " << full.target << "  "
        << cell(full) << "  " << cell(base) << "\n";
  }
  out << "--------------------------------------------------------------------------\n";
  out << "Total success rate: full " << results.successes(EpisodeMode::Full)
      << "/" << results.count(EpisodeMode::Full) << ", baseline "
      << results.successes(EpisodeMode::Baseline) << "/"
      << results.count(EpisodeMode::Baseline) << "\n";
  return out.str();
}

}  // namespace graspkit
