#include "shpi/core/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace shpi {

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("malformed number '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::size_t parse_index(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("malformed integer '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  std::size_t dim = 0;
  if (!dataset.empty() && dataset.trajectories.front().size() > 0) {
    dim = dataset.trajectories.front()[0].context.dim();
  }
  out << "episode_id,t,action,propensity,reward";
  for (std::size_t i = 0; i < dim; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t e = 0; e < dataset.trajectories.size(); ++e) {
    for (const Step& step : dataset.trajectories[e].steps) {
      out << e << ',' << step.time_index << ',' << step.action << ','
          << format_double(step.propensity) << ',' << format_double(step.reward);
      for (double v : step.context.features) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, dataset);
}

Dataset read_dataset(std::istream& in, const DatasetMeta& meta) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty");
  auto header = split(line);
  const char* expected[] = {"episode_id", "t", "action", "propensity", "reward"};
  if (header.size() < 5) throw std::runtime_error("dataset header has too few columns");
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[i] != expected[i]) throw std::runtime_error("unexpected dataset header");
  }
  const std::size_t dim = header.size() - 5;

  Dataset dataset;
  dataset.gamma = meta.gamma;
  dataset.window_step = meta.window_step;
  std::size_t max_action = 0;
  std::size_t current_episode = 0;
  bool have_episode = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    try {
      std::size_t episode = parse_index(fields[0]);
      Step step;
      step.time_index = parse_index(fields[1]);
      step.action = parse_index(fields[2]);
      step.propensity = parse_double(fields[3]);
      step.reward = parse_double(fields[4]);
      if (!(step.propensity > 0.0)) throw std::runtime_error("propensity must be > 0");
      step.context.features.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) step.context.features[i] = parse_double(fields[5 + i]);
      if (!have_episode || episode != current_episode) {
        Trajectory traj;
        traj.source_offset = step.time_index;
        traj.stream_id = episode;
        dataset.trajectories.push_back(std::move(traj));
        current_episode = episode;
        have_episode = true;
      }
      max_action = std::max(max_action, step.action);
      dataset.trajectories.back().steps.push_back(std::move(step));
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  if (dataset.empty()) throw std::runtime_error("dataset file has no rows");
  dataset.window_length = dataset.trajectories.front().size();
  dataset.action_count = meta.action_count > 0 ? meta.action_count : max_action + 1;
  try {
    dataset.validate();
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error(std::string("invalid dataset: ") + err.what());
  }
  return dataset;
}

Dataset read_dataset(const std::filesystem::path& path, const DatasetMeta& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in, meta);
}

}  // namespace shpi
