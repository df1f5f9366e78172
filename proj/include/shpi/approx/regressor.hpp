#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace shpi::approx {

enum class Architecture { kLinear, kFeedforward };

/// Linear or rectifier-MLP regressor with one scalar output per head.
///
/// Parameters live in one flat vector, layer by layer: the weight matrix
/// (out x in, column-major) followed by the bias. Inputs are standardized with
/// (x - input_shift) / input_scale and outputs mapped through
/// output_scale * net + output_shift; both transforms default to identity.
class Regressor {
 public:
  Regressor() = default;

  static Regressor linear(std::size_t input_dim, std::size_t output_dim);
  static Regressor feedforward(std::size_t input_dim, std::size_t output_dim,
                               std::vector<std::size_t> hidden = {32, 32});

  /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
  void initialize(std::uint64_t seed);

  Architecture architecture() const { return architecture_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  std::size_t layer_count() const { return dims_.size() - 1; }

  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  Eigen::VectorXd predict(std::span<const double> x) const;
  double predict_head(std::span<const double> x, std::size_t head) const;

  // Network-space primitives (no output transform). `inputs` holds one raw
  // sample per column; activations[0] receives the standardized inputs.
  void forward(const Eigen::MatrixXd& inputs, std::vector<Eigen::MatrixXd>& activations) const;
  /// Accumulates d(sum_j delta_j . net_j)/d(params) into `grad`.
  void backward(const std::vector<Eigen::MatrixXd>& activations, Eigen::MatrixXd delta,
                Eigen::VectorXd& grad) const;

  Eigen::VectorXd input_shift;
  Eigen::VectorXd input_scale;
  double output_shift = 0.0;
  double output_scale = 1.0;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Regressor load(std::istream& in);
  static Regressor load(const std::filesystem::path& path);

  bool operator==(const Regressor& other) const;

 private:
  struct Layer {
    std::size_t in = 0, out = 0, weight_offset = 0, bias_offset = 0;
  };

  void build(Architecture architecture, std::vector<std::size_t> dims);

  Architecture architecture_ = Architecture::kLinear;
  std::vector<std::size_t> dims_{1, 1};
  std::vector<std::size_t> hidden_;
  std::vector<Layer> layers_;
  Eigen::VectorXd params_;
};

}  // namespace shpi::approx
