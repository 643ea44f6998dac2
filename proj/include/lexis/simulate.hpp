#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lexis/model.hpp"

namespace lexis {

enum class EventKind { birth, death };

// One accepted event. For a death, age_at_event is the age of the removed
// individual and individual_index its stable index; for a birth they are 0
// and the newborn's freshly assigned index. Indices are assigned by
// insertion order: initial individuals take 0..n0-1 in ascending age order,
// newborns continue from n0.
struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::birth;
  double age_at_event = 0.0;
  std::int64_t individual_index = 0;
};

struct DeathRecord {
  double time = 0.0;
  double age = 0.0;
};

// Population snapshot: ages sorted ascending, ties by insertion order.
// scale_N is the normalization of the empirical measure (mass = ages.size()
// / scale_N).
struct PopulationState {
  double time = 0.0;
  std::vector<double> ages;
  double scale_N = 1.0;
};

struct Trajectory {
  double scale_N = 1.0;
  std::uint64_t seed = 0;
  std::vector<PopulationState> snapshots;
  std::vector<EventRecord> events;    // unified time-ordered log
  std::vector<DeathRecord> deaths;    // (time, age) projection of death events
  std::vector<double> birth_times;    // times of birth events
  PopulationState final_state;
};

// n independent draws from the mass-normalized initial profile, sorted
// ascending, at time zero, with scale_N = n.
PopulationState sample_initial(const InitialDensity& initial, std::int64_t n,
                               std::uint64_t seed);

// Exact simulation of the particle system by Poisson thinning. Candidate
// times arrive at rate n * (birth_sup + death_sup); each candidate picks a
// uniform individual and a uniform level in [0, birth_sup + death_sup); the
// level decides birth, death, or rejection against the individual's actual
// rates. Ages advance at unit speed between events. Snapshots record the
// state just before any event at the same instant (left limits), with ages
// advanced to the snapshot time. Draw order per candidate: waiting time,
// individual, level. Rate evaluations above the certified bounds abort.
//
// init.time must be 0; snapshot_times must be sorted inside [0, horizon].
// A rate field with birth_sup + death_sup = 0 yields pure transport.
Trajectory simulate(const PopulationState& init, const RateField& rates,
                    const Domain& domain, const std::vector<double>& snapshot_times,
                    std::uint64_t seed);

// Projections.
const std::vector<DeathRecord>& death_measure(const Trajectory& traj);
// Step function t -> <Z_t, 1> = n(t)/scale_N, one row per jump, starting at
// time 0; values are right-continuous (a row's value holds from its time on).
std::vector<std::pair<double, double>> population_size_path(const Trajectory& traj);

// Plain-text persistence, one value per column, comma separated, doubles at
// 17 significant digits (exact round trip). The event log stores
// "time,kind,age,index" rows; the snapshot file stores "snapshot_time,age"
// rows. Both start with '#' metadata lines (scale_N, seed).
void write_event_log(const std::filesystem::path& path, const Trajectory& traj);
void write_snapshot_file(const std::filesystem::path& path, const Trajectory& traj);

// Reads back what the writers above produced. The returned trajectory
// carries events, deaths, birth_times, snapshots, scale_N and seed; the
// final state is left empty unless the snapshot file recorded it.
Trajectory read_trajectory(const std::filesystem::path& event_log,
                           const std::filesystem::path& snapshot_file);

}  // namespace lexis
