#include "lexis/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lexis/io.hpp"

namespace lexis {

namespace {

struct Individual {
  double birth_time;       // negative for individuals older than the run
  std::int64_t index;      // stable insertion index
};

PopulationState snapshot_at(const std::vector<Individual>& pop, double time,
                            double scale_N) {
  PopulationState s;
  s.time = time;
  s.scale_N = scale_N;
  s.ages.reserve(pop.size());
  // Internal order is oldest first; ages ascending means youngest first.
  for (auto it = pop.rbegin(); it != pop.rend(); ++it)
    s.ages.push_back(time - it->birth_time);
  return s;
}

}  // namespace

PopulationState sample_initial(const InitialDensity& initial, std::int64_t n,
                               std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_initial: need at least one draw");
  Rng rng(seed);
  PopulationState s;
  s.time = 0.0;
  s.scale_N = static_cast<double>(n);
  s.ages.resize(static_cast<std::size_t>(n));
  for (auto& a : s.ages) a = initial.sample(rng);
  std::sort(s.ages.begin(), s.ages.end());
  return s;
}

Trajectory simulate(const PopulationState& init, const RateField& rates,
                    const Domain& domain, const std::vector<double>& snapshot_times,
                    std::uint64_t seed) {
  if (init.time != 0.0)
    throw std::invalid_argument("simulate: initial state must sit at time zero");
  if (!(init.scale_N > 0.0))
    throw std::invalid_argument("simulate: scale_N must be positive");
  const double T = domain.horizon_T;
  if (!(T >= 0.0)) throw std::invalid_argument("simulate: negative horizon");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] < 0.0 || snapshot_times[i] > T)
      throw std::invalid_argument("simulate: snapshot time outside [0, horizon]");
    if (i > 0 && snapshot_times[i] < snapshot_times[i - 1])
      throw std::invalid_argument("simulate: snapshot times must be sorted");
  }

  Trajectory traj;
  traj.scale_N = init.scale_N;
  traj.seed = seed;

  // Oldest first: descending age = ascending birth time.
  std::vector<Individual> pop;
  pop.reserve(init.ages.size() * 2);
  {
    std::vector<double> ages = init.ages;
    std::sort(ages.begin(), ages.end());
    // Ascending ages carry indices 0..n0-1; internal storage is oldest first.
    for (std::size_t i = ages.size(); i-- > 0;)
      pop.push_back(Individual{0.0 - ages[i], static_cast<std::int64_t>(i)});
  }
  std::int64_t next_index = static_cast<std::int64_t>(pop.size());

  Rng rng(seed);
  const double total_sup = rates.birth_sup() + rates.death_sup();
  const double tol_b = rates.birth_sup() * 1e-12 + 1e-300;
  const double tol_d = rates.death_sup() * 1e-12 + 1e-300;

  std::size_t next_snap = 0;
  auto emit_snapshots_through = [&](double upto) {
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= upto) {
      traj.snapshots.push_back(snapshot_at(pop, snapshot_times[next_snap], traj.scale_N));
      ++next_snap;
    }
  };

  double t = 0.0;
  while (!pop.empty() && total_sup > 0.0) {
    const double rate = static_cast<double>(pop.size()) * total_sup;
    const double wait = rng.exponential(rate);
    const double t_cand = t + wait;
    if (t_cand > T) break;
    // Left limits: a snapshot at the candidate instant excludes the event.
    emit_snapshots_through(t_cand);

    const auto pick = static_cast<std::size_t>(rng.uniform_below(pop.size()));
    const double level = rng.uniform(0.0, total_sup);
    const double age = t_cand - pop[pick].birth_time;

    const double b = rates.birth(t_cand, age);
    const double d = rates.death(t_cand, age);
    if (b < 0.0 || b > rates.birth_sup() + tol_b)
      throw std::runtime_error("simulate: birth rate left [0, birth_sup] at age " +
                               std::to_string(age));
    if (d < 0.0 || d > rates.death_sup() + tol_d)
      throw std::runtime_error("simulate: death rate left [0, death_sup] at age " +
                               std::to_string(age));

    if (level < b) {
      traj.events.push_back(EventRecord{t_cand, EventKind::birth, 0.0, next_index});
      traj.birth_times.push_back(t_cand);
      pop.push_back(Individual{t_cand, next_index});
      ++next_index;
    } else if (level < b + d) {
      traj.events.push_back(
          EventRecord{t_cand, EventKind::death, age, pop[pick].index});
      traj.deaths.push_back(DeathRecord{t_cand, age});
      pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    t = t_cand;
  }

  emit_snapshots_through(T);
  traj.final_state = snapshot_at(pop, T, traj.scale_N);
  return traj;
}

const std::vector<DeathRecord>& death_measure(const Trajectory& traj) {
  return traj.deaths;
}

std::vector<std::pair<double, double>> population_size_path(const Trajectory& traj) {
  std::vector<std::pair<double, double>> path;
  path.reserve(traj.events.size() + 1);
  // Initial count: final count minus the net effect of all events.
  long long net = 0;
  for (const auto& e : traj.events) net += (e.kind == EventKind::birth) ? 1 : -1;
  long long n = static_cast<long long>(traj.final_state.ages.size()) - net;
  path.emplace_back(0.0, static_cast<double>(n) / traj.scale_N);
  for (const auto& e : traj.events) {
    n += (e.kind == EventKind::birth) ? 1 : -1;
    path.emplace_back(e.time, static_cast<double>(n) / traj.scale_N);
  }
  return path;
}

void write_event_log(const std::filesystem::path& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "# lexis event log\n";
  out << "# scale_N " << format_double(traj.scale_N) << "\n";
  out << "# seed " << traj.seed << "\n";
  out << "time,kind,age,index\n";
  for (const auto& e : traj.events) {
    out << format_double(e.time) << ','
        << (e.kind == EventKind::birth ? "birth" : "death") << ','
        << format_double(e.age_at_event) << ',' << e.individual_index << '\n';
  }
  write_text_file(path, out.str());
}

void write_snapshot_file(const std::filesystem::path& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "# lexis snapshots\n";
  out << "# scale_N " << format_double(traj.scale_N) << "\n";
  out << "# seed " << traj.seed << "\n";
  out << "# final_time " << format_double(traj.final_state.time) << "\n";
  out << "snapshot_time,age\n";
  for (const auto& s : traj.snapshots)
    for (double a : s.ages) out << format_double(s.time) << ',' << format_double(a) << '\n';
  for (double a : traj.final_state.ages)
    out << "final," << format_double(a) << '\n';
  write_text_file(path, out.str());
}

namespace {

void parse_metadata(const std::string& line, double* scale_N, std::uint64_t* seed,
                    double* final_time) {
  std::istringstream ss(line);
  std::string hash, key;
  ss >> hash >> key;
  if (key == "scale_N") ss >> *scale_N;
  if (key == "seed") ss >> *seed;
  if (key == "final_time" && final_time) ss >> *final_time;
}

}  // namespace

Trajectory read_trajectory(const std::filesystem::path& event_log,
                           const std::filesystem::path& snapshot_file) {
  Trajectory traj;
  double final_time = 0.0;
  {
    std::istringstream in(read_text_file(event_log));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        parse_metadata(line, &traj.scale_N, &traj.seed, nullptr);
        continue;
      }
      if (line.rfind("time,", 0) == 0) continue;
      std::istringstream row(line);
      std::string time_s, kind_s, age_s, index_s;
      std::getline(row, time_s, ',');
      std::getline(row, kind_s, ',');
      std::getline(row, age_s, ',');
      std::getline(row, index_s, ',');
      EventRecord e;
      e.time = std::stod(time_s);
      if (kind_s == "birth")
        e.kind = EventKind::birth;
      else if (kind_s == "death")
        e.kind = EventKind::death;
      else
        throw std::runtime_error("event log: unknown kind '" + kind_s + "'");
      e.age_at_event = std::stod(age_s);
      e.individual_index = std::stoll(index_s);
      traj.events.push_back(e);
      if (e.kind == EventKind::death)
        traj.deaths.push_back(DeathRecord{e.time, e.age_at_event});
      else
        traj.birth_times.push_back(e.time);
    }
  }
  {
    std::istringstream in(read_text_file(snapshot_file));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        parse_metadata(line, &traj.scale_N, &traj.seed, &final_time);
        continue;
      }
      if (line.rfind("snapshot_time,", 0) == 0) continue;
      std::istringstream row(line);
      std::string time_s, age_s;
      std::getline(row, time_s, ',');
      std::getline(row, age_s, ',');
      const double age = std::stod(age_s);
      if (time_s == "final") {
        traj.final_state.ages.push_back(age);
        continue;
      }
      const double tv = std::stod(time_s);
      if (traj.snapshots.empty() || traj.snapshots.back().time != tv) {
        PopulationState s;
        s.time = tv;
        traj.snapshots.push_back(std::move(s));
      }
      traj.snapshots.back().ages.push_back(age);
    }
    for (auto& s : traj.snapshots) s.scale_N = traj.scale_N;
    traj.final_state.time = final_time;
    traj.final_state.scale_N = traj.scale_N;
  }
  return traj;
}

}  // namespace lexis
