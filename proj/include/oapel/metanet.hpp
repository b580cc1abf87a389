#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/types.hpp"

namespace oapel::metanet {

/// One hidden ReLU layer and a sigmoid output unit:
///   p* = sigmoid(w2 . relu(W1 p + b1) + b2)
struct MetaNet {
  Eigen::MatrixXd w1;  // hidden x inputs
  Vector b1;           // hidden
  Vector w2;           // hidden
  double b2 = 0.0;

  std::size_t inputs() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
  bool operator==(const MetaNet&) const = default;
};

struct MetaTrainConfig {
  double l2 = 0.001;
  int epochs = 1000;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int hidden = 0;  // 0 selects max(4, 2 * inputs)
  std::uint64_t seed = 0;

  void validate() const;
  int hidden_for(std::size_t inputs) const;
  bool operator==(const MetaTrainConfig&) const = default;
};

/// All-zero network with the given shape.
MetaNet zero_net(std::size_t inputs, std::size_t hidden);

/// Glorot-uniform weights, zero biases.
MetaNet init_net(std::size_t inputs, std::size_t hidden, std::uint64_t seed);

/// Output in (0, 1). Throws DataError on an input of the wrong length.
double forward(const MetaNet& net, std::span<const double> p);

/// Regularised mean binary cross entropy; the L2 term covers W1 and w2 only.
double loss(const MetaNet& net, const Matrix& inputs, const Labels& y, double l2);

struct Gradient {
  Eigen::MatrixXd w1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;
  double loss = 0.0;
};

Gradient loss_and_gradient(const MetaNet& net, const Matrix& inputs, const Labels& y, double l2);

/// Full-batch Adam on `loss`. When `loss_trace` is given it receives the
/// loss before every epoch and once after the last.
MetaNet train_meta(const Matrix& inputs, const Labels& y, const MetaTrainConfig& cfg,
                   std::vector<double>* loss_trace = nullptr);

nlohmann::json to_json(const MetaNet& net);
MetaNet metanet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetaTrainConfig& cfg);
MetaTrainConfig meta_config_from_json(const nlohmann::json& j);

}  // namespace oapel::metanet
