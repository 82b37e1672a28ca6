#include "gaitmirror/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

namespace {

constexpr char kHeader[] = "trial,cycle,sample,t,theta,phase";

std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw MalformedTrajectoryError(where + ": expected a number, got '" + text + "'");
  }
}

/// A cycle is annotated when its labels start at STF and change only along
/// the fixed phase order, visiting all four phases.
void finalize_cycle(LoadedCycle& cycle, const std::vector<std::string>& labels) {
  cycle.annotated = false;
  if (labels.empty() || labels.front() != phase_name(kPhaseOrder[0])) return;
  std::array<std::size_t, kNumPhases> starts{};
  int seen = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) continue;
    if (seen + 1 >= kNumPhases ||
        labels[i] != phase_name(kPhaseOrder[static_cast<std::size_t>(seen + 1)]))
      return;
    starts[static_cast<std::size_t>(++seen)] = i;
  }
  if (seen != kNumPhases - 1) return;
  cycle.annotated = true;
  cycle.trajectory.phase_start = starts;
}

}  // namespace

TrajectoryCsvWriter::TrajectoryCsvWriter(std::ostream& out, int trial) : out_(&out), trial_(trial) {
  *out_ << kHeader << "\n";
}

void TrajectoryCsvWriter::write_cycle(long cycle, const Trajectory& trajectory) {
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    *out_ << trial_ << ',' << cycle << ',' << i << ',' << format_double(trajectory.time_at(i))
          << ',' << format_double(trajectory.angle_deg[i]) << ','
          << phase_name(trajectory.phase_at(i)) << "\n";
  }
}

std::vector<LoadedCycle> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedTrajectoryError("empty trajectory CSV");
  if (line.ends_with("\r")) line.pop_back();
  if (line != kHeader)
    throw MalformedTrajectoryError(std::string("bad trajectory CSV header, expected '") + kHeader +
                                   "'");

  std::vector<LoadedCycle> cycles;
  std::vector<std::string> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.ends_with("\r")) line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != 6)
      throw MalformedTrajectoryError(where + ": expected 6 columns, got " +
                                     std::to_string(fields.size()));

    const long trial = static_cast<long>(parse_number(fields[0], where));
    const long cycle = static_cast<long>(parse_number(fields[1], where));
    const auto sample = static_cast<std::size_t>(parse_number(fields[2], where));
    const double t = parse_number(fields[3], where);
    const double theta = parse_number(fields[4], where);

    if (cycles.empty() || cycles.back().trial != trial || cycles.back().cycle != cycle) {
      if (!cycles.empty()) finalize_cycle(cycles.back(), labels);
      cycles.push_back(LoadedCycle{trial, cycle, false, Trajectory{}});
      cycles.back().trajectory.t0 = t;
      labels.clear();
    }
    LoadedCycle& current = cycles.back();
    if (sample != current.trajectory.size())
      throw MalformedTrajectoryError(where + ": non-contiguous sample index");
    if (sample == 1) current.trajectory.dt = t - current.trajectory.t0;
    current.trajectory.angle_deg.push_back(theta);
    labels.push_back(fields[5]);
  }
  if (!cycles.empty()) finalize_cycle(cycles.back(), labels);
  return cycles;
}

std::vector<LoadedCycle> read_trajectory_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedTrajectoryError("cannot open trajectory CSV: " + path);
  return read_trajectory_csv(in);
}

}  // namespace gaitmirror
