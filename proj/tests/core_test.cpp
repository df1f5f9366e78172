#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "shpi/core/dataset_io.hpp"
#include "shpi/core/policy.hpp"
#include "shpi/core/rng.hpp"
#include "shpi/core/types.hpp"

namespace shpi {
namespace {

std::vector<Step> make_stream(std::size_t length, std::size_t dim = 2) {
  std::vector<Step> stream(length);
  for (std::size_t t = 0; t < length; ++t) {
    stream[t].context.features.assign(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) stream[t].context.features[j] = 0.25 * static_cast<double>(t) - static_cast<double>(j);
    stream[t].action = t % 3;
    stream[t].propensity = 1.0 / 3.0;
    stream[t].reward = std::sin(static_cast<double>(t));
    stream[t].time_index = t;
  }
  return stream;
}

TEST(WindowStream, CountsWindowsOfAFullEpisode) {
  const auto stream = make_stream(150);
  const Dataset d = window_stream(stream, 28, 20, 0.99, 3);
  ASSERT_EQ(d.trajectories.size(), 7u);
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
    EXPECT_EQ(d.trajectories[i].size(), 28u);
    EXPECT_EQ(d.trajectories[i].source_offset, 20 * i);
    EXPECT_EQ(d.trajectories[i][0].time_index, 20 * i);
  }
  EXPECT_EQ(d.step_count(), 7u * 28u);
  EXPECT_NO_THROW(d.validate());
}

TEST(WindowStream, StrideOneSeesEveryOffset) {
  const auto stream = make_stream(10);
  const Dataset d = window_stream(stream, 4, 1, 0.9, 3);
  EXPECT_EQ(d.trajectories.size(), 7u);
}

TEST(WindowStream, WindowEqualToStreamGivesOneTrajectory) {
  const auto stream = make_stream(28);
  EXPECT_EQ(window_stream(stream, 28, 28, 0.9, 3).trajectories.size(), 1u);
}

TEST(WindowStream, RejectsShortStream) {
  const auto stream = make_stream(5);
  try {
    window_stream(stream, 6, 1, 0.9, 3);
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("stream too short"), std::string::npos);
  }
}

TEST(WindowStream, RejectsZeroWindowOrStride) {
  const auto stream = make_stream(5);
  EXPECT_THROW(window_stream(stream, 0, 1, 0.9, 3), std::invalid_argument);
  EXPECT_THROW(window_stream(stream, 2, 0, 0.9, 3), std::invalid_argument);
}

TEST(Dataset, ValidateCatchesBrokenInvariants) {
  Dataset d = window_stream(make_stream(10), 5, 5, 0.9, 3);
  Dataset bad = d;
  bad.trajectories[0].steps[1].propensity = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = d;
  bad.trajectories[0].steps[2].action = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = d;
  bad.trajectories[1].steps.pop_back();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = d;
  bad.gamma = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Dataset, AppendRequiresMatchingMetadata) {
  Dataset a = window_stream(make_stream(10), 5, 5, 0.9, 3);
  const Dataset b = window_stream(make_stream(10), 5, 5, 0.9, 3, 1);
  a.append(b);
  EXPECT_EQ(a.trajectories.size(), 4u);
  const Dataset c = window_stream(make_stream(10), 4, 5, 0.9, 3);
  EXPECT_THROW(a.append(c), std::invalid_argument);
}

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(uniform01(rng) - 0.5, static_cast<int>(uniform_index(rng, 200)) - 100);
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_EQ(parse_double(format_double(-1e300)), -1e300);
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(DatasetIo, WriteReadRoundTrip) {
  Dataset d = window_stream(make_stream(40), 10, 7, 0.95, 3);
  std::stringstream buffer;
  write_dataset(buffer, d);
  DatasetMeta meta;
  meta.gamma = 0.95;
  meta.action_count = 3;
  meta.window_step = 7;
  const Dataset back = read_dataset(buffer, meta);
  ASSERT_EQ(back.trajectories.size(), d.trajectories.size());
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
    ASSERT_EQ(back.trajectories[i].size(), d.trajectories[i].size());
    for (std::size_t t = 0; t < d.trajectories[i].size(); ++t) {
      const Step& a = d.trajectories[i][t];
      const Step& b = back.trajectories[i][t];
      EXPECT_EQ(a.context, b.context);
      EXPECT_EQ(a.action, b.action);
      EXPECT_EQ(a.propensity, b.propensity);
      EXPECT_EQ(a.reward, b.reward);
    }
  }
  std::stringstream again;
  write_dataset(again, back);
  std::stringstream first;
  write_dataset(first, d);
  EXPECT_EQ(again.str(), first.str());
}

TEST(DatasetIo, RejectsNonpositivePropensityWithLineNumber) {
  std::stringstream in("episode_id,t,action,propensity,reward,x_0\n0,0,1,0.5,1.0,0.0\n0,1,0,0,1.0,0.0\n");
  try {
    read_dataset(in, DatasetMeta{});
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, InfersActionCount) {
  std::stringstream in("episode_id,t,action,propensity,reward,x_0\n0,0,4,0.5,1.0,0.0\n0,1,0,0.5,1.0,0.0\n");
  EXPECT_EQ(read_dataset(in, DatasetMeta{}).action_count, 5u);
}

TEST(Seeds, DerivationIsStableAndStageKeyed) {
  static_assert(derive_seed(7, "collect") == derive_seed(7, "collect"));
  EXPECT_NE(derive_seed(7, "collect"), derive_seed(7, "fit-value"));
  EXPECT_NE(derive_seed(7, "collect"), derive_seed(8, "collect"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(derive_seed(1, "x"), i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Rng, Uniform01StaysInRangeWithCorrectMean) {
  Rng rng(3);
  double total = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    total += u;
  }
  // 5 standard errors of a uniform mean
  EXPECT_NEAR(total / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Policy, UniformProbabilitiesAndSampling) {
  UniformPolicy pi(4);
  Context x{{0.0}};
  for (double p : pi.probabilities(x)) EXPECT_DOUBLE_EQ(p, 0.25);
  Rng rng(5);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40000; ++i) ++counts[pi.sample(x, rng)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 5.0 * std::sqrt(40000 * 0.25 * 0.75));
}

TEST(Policy, SampleDrawsExactlyOneUniform) {
  UniformPolicy pi(7);
  Context x{{0.0}};
  Rng a(9), b(9);
  pi.sample(x, a);
  uniform01(b);
  EXPECT_EQ(a(), b());
}

TEST(Argmax, LowestIndexWinsTies) {
  const std::vector<double> scores{1.0, 3.0, 3.0, -1.0};
  EXPECT_EQ(argmax(scores), 1u);
  const std::vector<double> flat(5, 0.0);
  EXPECT_EQ(argmax(flat), 0u);
}

}  // namespace
}  // namespace shpi
