#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shpi/core/types.hpp"

namespace shpi {

/// Metadata that the step-per-line file does not carry.
struct DatasetMeta {
  double gamma = 0.99;
  std::size_t action_count = 0;  ///< 0 infers max(action) + 1
  std::size_t window_step = 1;
};

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Writes `episode_id,t,action,propensity,reward,x_0,...,x_{d-1}` rows with a
/// header line. episode_id is the trajectory's position in the dataset.
void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Parses the format written by write_dataset. Rows of one episode must be
/// contiguous. Throws std::runtime_error naming the offending line, including
/// any line with propensity <= 0.
Dataset read_dataset(std::istream& in, const DatasetMeta& meta);
Dataset read_dataset(const std::filesystem::path& path, const DatasetMeta& meta);

}  // namespace shpi
