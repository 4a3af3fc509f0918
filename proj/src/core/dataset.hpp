#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/experts.hpp"
#include "core/rng.hpp"
#include "core/scene.hpp"
#include "core/track.hpp"

namespace burngail {

constexpr int kDatasetSchemaVersion = 1;

struct BurnInPair {
  Observation obs;
  Action action;
};

struct ContinuationPoint {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
};

// One recorded episode: 50 expert steps of the ego (the burn-in the style
// reader consumes), the full scene at handoff, and the expert's own
// continuation used as the reference trajectory. expert_continuation[i] is
// the ego pose after i+1 steps beyond the handoff; the handoff pose itself is
// implicit (curves start there with zero error).
struct Demonstration {
  int id = 0;
  int style_class = 0;
  double v0 = 0.0;
  std::vector<BurnInPair> burn_in;
  SceneState handoff_scene;
  std::vector<ExpertDriver> handoff_drivers;  // aligned with handoff_scene.vehicles
  std::vector<ContinuationPoint> expert_continuation;
  uint64_t rng_seed = 0;
};

struct DatasetSpec {
  int n_train = 960;
  int n_val = 480;
  int burn_in_steps = 50;
  int continuation_steps = 300;
  int n_vehicles = 12;
  uint64_t seed = 42;
  double spawn_speed_lo = 0.70;  // initial speed as fraction of v0
  double spawn_speed_hi = 0.95;
  double spawn_gap_cushion = 5.0;  // m beyond worst-case braking distance
  int spawn_max_retries = 200;
};

// Places n_vehicles on the ring: evenly spaced slots with forward jitter,
// random lane, speed a random fraction of the sampled desired speed. Rejects
// and retries layouts where any same-lane pair could not absorb its closing
// speed under hard braking. Vehicle 0 is the ego and gets ego_class; other
// classes are drawn uniformly.
SceneState spawn_scene(const TrackGeometry& track, const SimParams& sim,
                       const StyleTable& table, const DatasetSpec& spec,
                       StyleClass ego_class, Rng& rng,
                       std::vector<ExpertDriver>* drivers_out);

// Simulates burn-in + continuation entirely under expert control and records
// the Demonstration. Deterministic given (spec.seed, id).
Demonstration generate_demo(const TrackGeometry& track, const SimParams& sim,
                            const ObsStandardization& obsstd, const SteerGains& gains,
                            const StyleTable& table, const DatasetSpec& spec, int id);

// Demos id = first_id .. first_id+count-1, ego class = id % 4.
std::vector<Demonstration> generate_demos(const TrackGeometry& track, const SimParams& sim,
                                          const ObsStandardization& obsstd,
                                          const SteerGains& gains, const StyleTable& table,
                                          const DatasetSpec& spec, int first_id, int count,
                                          int workers);

// JSON-lines round trip. Field order is fixed; floats round-trip exactly.
void write_demos_jsonl(const std::string& path, const std::vector<Demonstration>& demos);
std::vector<Demonstration> read_demos_jsonl(const std::string& path);

std::array<int, kNumStyles> class_histogram(const std::vector<Demonstration>& demos);

}  // namespace burngail
