#include "shpi/improve/greedy_policy.hpp"

#include <fstream>
#include <stdexcept>

#include "shpi/core/dataset_io.hpp"

namespace shpi::improve {

GreedyPolicy::GreedyPolicy(approx::Regressor scorer, double epsilon)
    : scorer_(std::move(scorer)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
}

std::size_t GreedyPolicy::greedy_action(std::span<const double> x) const {
  const Eigen::VectorXd s = scorer_.predict(x);
  return argmax(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
}

std::size_t GreedyPolicy::greedy_action(const Context& x) const { return greedy_action(x.view()); }

void GreedyPolicy::probabilities(const Context& x, std::span<double> out) const {
  const std::size_t n = action_count();
  if (out.size() != n) throw std::invalid_argument("probability buffer has the wrong size");
  const double floor = epsilon_ / static_cast<double>(n);
  for (double& p : out) p = floor;
  out[greedy_action(x)] += 1.0 - epsilon_;
}

double GreedyPolicy::probability(const Context& x, std::size_t action) const {
  const double floor = epsilon_ / static_cast<double>(action_count());
  return action == greedy_action(x) ? floor + (1.0 - epsilon_) : floor;
}

void save_policy(std::ostream& out, const GreedyPolicy& policy, const PolicyMetadata& meta) {
  out << "shpi-policy 1\n"
      << "epsilon " << format_double(policy.epsilon()) << '\n'
      << "algorithm " << meta.algorithm << '\n'
      << "k " << meta.k << '\n'
      << "gamma " << format_double(meta.gamma) << '\n'
      << "bonus_mode " << meta.bonus_mode << '\n'
      << "iteration " << meta.iteration << '\n';
  policy.scorer().save(out);
}

void save_policy(const std::filesystem::path& path, const GreedyPolicy& policy, const PolicyMetadata& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  save_policy(out, policy, meta);
}

GreedyPolicy load_policy(std::istream& in, PolicyMetadata* meta) {
  auto expect = [&](const char* key) {
    std::string word;
    in >> word;
    if (word != key) throw std::runtime_error(std::string("policy file: expected ") + key);
    std::string value;
    in >> value;
    return value;
  };
  std::string magic, version;
  in >> magic >> version;
  if (magic != "shpi-policy" || version != "1") throw std::runtime_error("not a policy file");
  const double epsilon = parse_double(expect("epsilon"));
  PolicyMetadata m;
  m.algorithm = expect("algorithm");
  m.k = std::stoul(expect("k"));
  m.gamma = parse_double(expect("gamma"));
  m.bonus_mode = expect("bonus_mode");
  m.iteration = std::stoul(expect("iteration"));
  if (meta != nullptr) *meta = m;
  return GreedyPolicy(approx::Regressor::load(in), epsilon);
}

GreedyPolicy load_policy(const std::filesystem::path& path, PolicyMetadata* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_policy(in, meta);
}

}  // namespace shpi::improve
