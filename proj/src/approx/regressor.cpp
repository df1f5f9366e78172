#include "shpi/approx/regressor.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "shpi/core/dataset_io.hpp"
#include "shpi/core/rng.hpp"

namespace shpi::approx {

namespace {

constexpr const char* kMagic = "shpi-regressor";
constexpr int kVersion = 1;

std::string expect_key(std::istream& in, const std::string& key) {
  std::string word;
  if (!(in >> word) || word != key) {
    throw std::runtime_error("model file: expected '" + key + "', got '" + word + "'");
  }
  return word;
}

double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("model file: truncated");
  return parse_double(token);
}

std::size_t read_size(std::istream& in) {
  long long value = -1;
  if (!(in >> value) || value < 0) throw std::runtime_error("model file: bad integer");
  return static_cast<std::size_t>(value);
}

}  // namespace

void Regressor::build(Architecture architecture, std::vector<std::size_t> dims) {
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("layer widths must be positive");
  }
  architecture_ = architecture;
  dims_ = std::move(dims);
  hidden_.assign(dims_.begin() + 1, dims_.end() - 1);
  layers_.clear();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    Layer layer;
    layer.in = dims_[l];
    layer.out = dims_[l + 1];
    layer.weight_offset = offset;
    offset += layer.in * layer.out;
    layer.bias_offset = offset;
    offset += layer.out;
    layers_.push_back(layer);
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
  input_shift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims_.front()));
  input_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dims_.front()));
  output_shift = 0.0;
  output_scale = 1.0;
}

Regressor Regressor::linear(std::size_t input_dim, std::size_t output_dim) {
  Regressor model;
  model.build(Architecture::kLinear, {input_dim, output_dim});
  return model;
}

Regressor Regressor::feedforward(std::size_t input_dim, std::size_t output_dim,
                                 std::vector<std::size_t> hidden) {
  if (hidden.empty()) throw std::invalid_argument("feedforward model needs hidden layers");
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  Regressor model;
  model.build(Architecture::kFeedforward, std::move(dims));
  return model;
}

void Regressor::initialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "regressor-init"));
  for (const Layer& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) {
      params_[static_cast<Eigen::Index>(layer.weight_offset + i)] = limit * (2.0 * uniform01(rng) - 1.0);
    }
    for (std::size_t i = 0; i < layer.out; ++i) params_[static_cast<Eigen::Index>(layer.bias_offset + i)] = 0.0;
  }
}

void Regressor::forward(const Eigen::MatrixXd& inputs, std::vector<Eigen::MatrixXd>& activations) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(inputs.rows()) + " features, model expects " +
                                std::to_string(input_dim()));
  }
  activations.resize(layers_.size() + 1);
  activations[0] = (inputs.colwise() - input_shift).array().colwise() / input_scale.array();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + layer.weight_offset,
                                        static_cast<Eigen::Index>(layer.out),
                                        static_cast<Eigen::Index>(layer.in));
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + layer.bias_offset,
                                        static_cast<Eigen::Index>(layer.out));
    activations[l + 1].noalias() = w * activations[l];
    activations[l + 1].colwise() += b;
    if (l + 1 < layers_.size()) activations[l + 1] = activations[l + 1].cwiseMax(0.0);
  }
}

void Regressor::backward(const std::vector<Eigen::MatrixXd>& activations, Eigen::MatrixXd delta,
                         Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + layer.weight_offset, static_cast<Eigen::Index>(layer.out),
                                   static_cast<Eigen::Index>(layer.in));
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + layer.bias_offset, static_cast<Eigen::Index>(layer.out));
    gw.noalias() += delta * activations[l].transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> w(params_.data() + layer.weight_offset,
                                          static_cast<Eigen::Index>(layer.out),
                                          static_cast<Eigen::Index>(layer.in));
      Eigen::MatrixXd back = w.transpose() * delta;
      delta = (activations[l].array() > 0.0).select(back, 0.0);
    }
  }
}

Eigen::VectorXd Regressor::predict(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(input_dim()));
  }
  Eigen::VectorXd a = (Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) -
                       input_shift)
                          .cwiseQuotient(input_scale);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + layer.weight_offset,
                                        static_cast<Eigen::Index>(layer.out),
                                        static_cast<Eigen::Index>(layer.in));
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + layer.bias_offset,
                                        static_cast<Eigen::Index>(layer.out));
    Eigen::VectorXd z = w * a + b;
    a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return (a * output_scale).array() + output_shift;
}

double Regressor::predict_head(std::span<const double> x, std::size_t head) const {
  if (head >= output_dim()) throw std::out_of_range("output head out of range");
  return predict(x)[static_cast<Eigen::Index>(head)];
}

void Regressor::save(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << '\n';
  out << "architecture " << (architecture_ == Architecture::kLinear ? "linear" : "feedforward") << '\n';
  out << "input_dim " << input_dim() << '\n';
  out << "output_dim " << output_dim() << '\n';
  out << "hidden " << hidden_.size();
  for (std::size_t h : hidden_) out << ' ' << h;
  out << '\n';
  out << "input_shift";
  for (double v : input_shift) out << ' ' << format_double(v);
  out << '\n';
  out << "input_scale";
  for (double v : input_scale) out << ' ' << format_double(v);
  out << '\n';
  out << "output_shift " << format_double(output_shift) << '\n';
  out << "output_scale " << format_double(output_scale) << '\n';
  out << "parameters " << params_.size() << '\n';
  for (double v : params_) out << format_double(v) << '\n';
}

void Regressor::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
}

Regressor Regressor::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic || version != kVersion) {
    throw std::runtime_error("not a regressor model file");
  }
  expect_key(in, "architecture");
  std::string arch;
  in >> arch;
  if (arch != "linear" && arch != "feedforward") throw std::runtime_error("unknown architecture " + arch);
  expect_key(in, "input_dim");
  const std::size_t input_dim = read_size(in);
  expect_key(in, "output_dim");
  const std::size_t output_dim = read_size(in);
  expect_key(in, "hidden");
  std::vector<std::size_t> hidden(read_size(in));
  for (auto& h : hidden) h = read_size(in);

  Regressor model = arch == "linear" ? linear(input_dim, output_dim)
                                     : feedforward(input_dim, output_dim, hidden);
  expect_key(in, "input_shift");
  for (auto& v : model.input_shift) v = read_double(in);
  expect_key(in, "input_scale");
  for (auto& v : model.input_scale) v = read_double(in);
  expect_key(in, "output_shift");
  model.output_shift = read_double(in);
  expect_key(in, "output_scale");
  model.output_scale = read_double(in);
  expect_key(in, "parameters");
  if (read_size(in) != model.parameter_count()) throw std::runtime_error("parameter count mismatch");
  for (auto& v : model.params_) v = read_double(in);
  return model;
}

Regressor Regressor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

bool Regressor::operator==(const Regressor& other) const {
  return architecture_ == other.architecture_ && dims_ == other.dims_ && params_ == other.params_ &&
         input_shift == other.input_shift && input_scale == other.input_scale &&
         output_shift == other.output_shift && output_scale == other.output_scale;
}

}  // namespace shpi::approx
