#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gaitmirror/plant.hpp"

namespace gaitmirror {

/// Columns: trial,cycle,sample,t,theta,phase. Phase is a name (STF, STE,
/// SWF, SWE) for annotated trajectories and empty for raw angle logs.
class TrajectoryCsvWriter {
 public:
  TrajectoryCsvWriter(std::ostream& out, int trial);

  void write_cycle(long cycle, const Trajectory& trajectory);

 private:
  std::ostream* out_;
  int trial_;
};

struct LoadedCycle {
  long trial = 0;
  long cycle = 0;
  bool annotated = false;  // all four phase labels present, in order
  Trajectory trajectory;
};

/// Parse a trajectory CSV back into per-cycle series. Cycles whose phase
/// column is empty (or inconsistent) come back with annotated=false and
/// only t0/dt/angles filled in. Throws MalformedTrajectoryError on rows
/// that do not fit the schema.
std::vector<LoadedCycle> read_trajectory_csv(std::istream& in);
std::vector<LoadedCycle> read_trajectory_csv_file(const std::string& path);

}  // namespace gaitmirror
