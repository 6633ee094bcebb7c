#pragma once

#include "graspkit/pipeline.hpp"

namespace graspkit {

struct BenchResults {
  /// Trials in a fixed order: template-major, then pair, then full before
  /// baseline. Within a pair both trials share the scene and the seed.
  std::vector<TrialResult> trials;

  std::size_t successes(EpisodeMode mode) const;
  std::size_t count(EpisodeMode mode) const;
};

/// Paired protocol: per template and pair index, one seeded scene and one
/// seeded initial stance, executed once in full mode and once in baseline
/// mode from identical initial conditions.
BenchResults run_paired_benchmark(const std::vector<std::string>& templates,
                                  int pairs, const PipelineConfig& config,
                                  std::uint64_t master_seed);

std::string bench_to_csv(const BenchResults& results);
std::string bench_to_json(const BenchResults& results);
std::string bench_to_table(const BenchResults& results);

}  // namespace graspkit
