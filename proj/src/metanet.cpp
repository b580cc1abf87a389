#include "oapel/metanet.hpp"

#include <algorithm>
#include <cmath>

#include "oapel/boosting.hpp"
#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::metanet {

namespace {

constexpr double kLossClip = 1e-12;
constexpr double kProbFloor = 1e-15;

void check_inputs(const Matrix& inputs, const Labels& y, std::size_t expected_cols) {
  if (static_cast<std::size_t>(inputs.rows()) != y.size())
    throw DataError("metanet: " + std::to_string(inputs.rows()) + " rows but " + std::to_string(y.size()) + " labels");
  if (static_cast<std::size_t>(inputs.cols()) != expected_cols)
    throw DataError("metanet: expected " + std::to_string(expected_cols) + " inputs, got " +
                    std::to_string(inputs.cols()));
  if (!inputs.allFinite()) throw DataError("metanet: non-finite input");
}

struct Forward {
  Eigen::MatrixXd pre;  // M x h
  Eigen::MatrixXd act;  // M x h
  Vector prob;          // M
};

Forward run(const MetaNet& net, const Matrix& inputs) {
  Forward f;
  f.pre = inputs * net.w1.transpose();
  f.pre.rowwise() += net.b1.transpose();
  f.act = f.pre.cwiseMax(0.0);
  Vector z = f.act * net.w2;
  z.array() += net.b2;
  f.prob = z.unaryExpr([](double m) { return boosting::logistic(m); });
  return f;
}

double penalty(const MetaNet& net, double l2) { return l2 * (net.w1.squaredNorm() + net.w2.squaredNorm()); }

double bce(const Vector& prob, const Labels& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(prob(static_cast<Eigen::Index>(i)), kLossClip, 1.0 - kLossClip);
    s -= y[i] ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

void MetaTrainConfig::validate() const {
  if (!(l2 >= 0.0)) throw UsageError("meta: l2 must be >= 0");
  if (epochs < 1) throw UsageError("meta: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("meta: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("meta: Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("meta: epsilon must be > 0");
  if (hidden < 0) throw UsageError("meta: hidden must be >= 0");
}

int MetaTrainConfig::hidden_for(std::size_t inputs) const {
  return hidden > 0 ? hidden : std::max(4, 2 * static_cast<int>(inputs));
}

MetaNet zero_net(std::size_t inputs, std::size_t hidden) {
  MetaNet net;
  net.w1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(inputs));
  net.b1 = Vector::Zero(static_cast<Eigen::Index>(hidden));
  net.w2 = Vector::Zero(static_cast<Eigen::Index>(hidden));
  net.b2 = 0.0;
  return net;
}

MetaNet init_net(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  auto net = zero_net(inputs, hidden);
  Rng rng(seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) net.w1(r, c) = (2.0 * rng.uniform() - 1.0) * a1;
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (Eigen::Index r = 0; r < net.w2.size(); ++r) net.w2(r) = (2.0 * rng.uniform() - 1.0) * a2;
  return net;
}

double forward(const MetaNet& net, std::span<const double> p) {
  if (p.size() != net.inputs())
    throw DataError("metanet: expected " + std::to_string(net.inputs()) + " inputs, got " + std::to_string(p.size()));
  double z = net.b2;
  for (Eigen::Index h = 0; h < net.w1.rows(); ++h) {
    double a = net.b1(h);
    for (Eigen::Index i = 0; i < net.w1.cols(); ++i) a += net.w1(h, i) * p[static_cast<std::size_t>(i)];
    if (a > 0.0) z += net.w2(h) * a;
  }
  return std::clamp(boosting::logistic(z), kProbFloor, 1.0 - kProbFloor);
}

double loss(const MetaNet& net, const Matrix& inputs, const Labels& y, double l2) {
  check_inputs(inputs, y, net.inputs());
  return bce(run(net, inputs).prob, y) + penalty(net, l2);
}

Gradient loss_and_gradient(const MetaNet& net, const Matrix& inputs, const Labels& y, double l2) {
  check_inputs(inputs, y, net.inputs());
  const auto f = run(net, inputs);
  const auto m = static_cast<double>(y.size());

  Vector dz(f.prob.size());
  for (Eigen::Index i = 0; i < dz.size(); ++i) dz(i) = (f.prob(i) - y[static_cast<std::size_t>(i)]) / m;

  Gradient g;
  g.loss = bce(f.prob, y) + penalty(net, l2);
  g.w2 = f.act.transpose() * dz + 2.0 * l2 * net.w2;
  g.b2 = dz.sum();
  Eigen::MatrixXd dpre = dz * net.w2.transpose();
  dpre.array() *= (f.pre.array() > 0.0).cast<double>();
  g.w1 = dpre.transpose() * inputs + 2.0 * l2 * net.w1;
  g.b1 = dpre.colwise().sum().transpose();
  return g;
}

MetaNet train_meta(const Matrix& inputs, const Labels& y, const MetaTrainConfig& cfg, std::vector<double>* loss_trace) {
  cfg.validate();
  if (y.size() < 2) throw DataError("metanet: need at least two training samples");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("metanet: labels must be 0/1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) throw DataError("metanet: training labels contain a single class");
  const auto k = static_cast<std::size_t>(inputs.cols());
  check_inputs(inputs, y, k);

  auto net = init_net(k, static_cast<std::size_t>(cfg.hidden_for(k)), cfg.seed);

  // Adam moments, one per parameter block.
  auto m = zero_net(k, net.hidden());
  auto v = zero_net(k, net.hidden());
  double b1pow = 1.0, b2pow = 1.0;
  if (loss_trace) loss_trace->clear();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto g = loss_and_gradient(net, inputs, y, cfg.l2);
    if (loss_trace) loss_trace->push_back(g.loss);
    if (!std::isfinite(g.loss)) throw NumericalError("metanet: loss became non-finite at epoch " + std::to_string(epoch));
    b1pow *= cfg.beta1;
    b2pow *= cfg.beta2;
    const double c1 = 1.0 - b1pow, c2 = 1.0 - b2pow;

    m.w1 = cfg.beta1 * m.w1 + (1.0 - cfg.beta1) * g.w1;
    v.w1 = cfg.beta2 * v.w1 + (1.0 - cfg.beta2) * g.w1.cwiseProduct(g.w1);
    net.w1.array() -= cfg.learning_rate * (m.w1.array() / c1) / ((v.w1.array() / c2).sqrt() + cfg.epsilon);

    m.b1 = cfg.beta1 * m.b1 + (1.0 - cfg.beta1) * g.b1;
    v.b1 = cfg.beta2 * v.b1 + (1.0 - cfg.beta2) * g.b1.cwiseProduct(g.b1);
    net.b1.array() -= cfg.learning_rate * (m.b1.array() / c1) / ((v.b1.array() / c2).sqrt() + cfg.epsilon);

    m.w2 = cfg.beta1 * m.w2 + (1.0 - cfg.beta1) * g.w2;
    v.w2 = cfg.beta2 * v.w2 + (1.0 - cfg.beta2) * g.w2.cwiseProduct(g.w2);
    net.w2.array() -= cfg.learning_rate * (m.w2.array() / c1) / ((v.w2.array() / c2).sqrt() + cfg.epsilon);

    m.b2 = cfg.beta1 * m.b2 + (1.0 - cfg.beta1) * g.b2;
    v.b2 = cfg.beta2 * v.b2 + (1.0 - cfg.beta2) * g.b2 * g.b2;
    net.b2 -= cfg.learning_rate * (m.b2 / c1) / (std::sqrt(v.b2 / c2) + cfg.epsilon);
  }
  if (loss_trace) loss_trace->push_back(loss(net, inputs, y, cfg.l2));
  return net;
}

nlohmann::json to_json(const MetaNet& net) {
  nlohmann::json w1 = nlohmann::json::array();
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) row.push_back(net.w1(r, c));
    w1.push_back(std::move(row));
  }
  return {{"w1", std::move(w1)},
          {"b1", std::vector<double>(net.b1.data(), net.b1.data() + net.b1.size())},
          {"w2", std::vector<double>(net.w2.data(), net.w2.data() + net.w2.size())},
          {"b2", net.b2}};
}

MetaNet metanet_from_json(const nlohmann::json& j) {
  try {
    const auto w1 = j.at("w1").get<std::vector<std::vector<double>>>();
    const auto b1 = j.at("b1").get<std::vector<double>>();
    const auto w2 = j.at("w2").get<std::vector<double>>();
    if (w1.empty() || b1.size() != w1.size() || w2.size() != w1.size())
      throw DataError("malformed meta net JSON: inconsistent shapes");
    auto net = zero_net(w1[0].size(), w1.size());
    for (std::size_t r = 0; r < w1.size(); ++r) {
      if (w1[r].size() != w1[0].size()) throw DataError("malformed meta net JSON: ragged w1");
      for (std::size_t c = 0; c < w1[r].size(); ++c)
        net.w1(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w1[r][c];
      net.b1(static_cast<Eigen::Index>(r)) = b1[r];
      net.w2(static_cast<Eigen::Index>(r)) = w2[r];
    }
    net.b2 = j.at("b2").get<double>();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed meta net JSON: ") + e.what());
  }
}

nlohmann::json to_json(const MetaTrainConfig& cfg) {
  return {{"l2", cfg.l2},         {"epochs", cfg.epochs}, {"learning_rate", cfg.learning_rate},
          {"beta1", cfg.beta1},   {"beta2", cfg.beta2},   {"epsilon", cfg.epsilon},
          {"hidden", cfg.hidden}, {"seed", cfg.seed}};
}

MetaTrainConfig meta_config_from_json(const nlohmann::json& j) {
  MetaTrainConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "l2")
      cfg.l2 = value.get<double>();
    else if (key == "epochs")
      cfg.epochs = value.get<int>();
    else if (key == "learning_rate")
      cfg.learning_rate = value.get<double>();
    else if (key == "beta1")
      cfg.beta1 = value.get<double>();
    else if (key == "beta2")
      cfg.beta2 = value.get<double>();
    else if (key == "epsilon")
      cfg.epsilon = value.get<double>();
    else if (key == "hidden")
      cfg.hidden = value.get<int>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else
      throw UsageError("meta: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace oapel::metanet
