// Neural characteristic curves: one network per curve, trained jointly on
// the forcing-prediction loss with full-batch Adam.

#ifndef CCIDENT_NN_CC_HPP
#define CCIDENT_NN_CC_HPP

#include "ccident/core.hpp"
#include "ccident/mlp.hpp"

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

namespace ccident {

using Net = Mlp<double>;

struct TrainConfig {
  int neurons = 100;
  int hidden_layers = 2;
  Activation activation = Activation::ReLU;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long max_epochs = 20000;
  double loss_stop = 1e-7;
  double lambda_c = 0.01;  // velocity family only
  std::uint64_t seed = 0;
  long history_every = 100;

  std::vector<int> widths() const { return mlp_widths(neurons, hidden_layers); }
};

/// First/second moment estimates with the shape of the network.
struct AdamState {
  Net m, v;
  long step = 0;

  explicit AdamState(const Net& like);
  /// One bias-corrected Adam update of `net` with gradient `grad`.
  void update(Net& net, const Net& grad, const TrainConfig& cfg);
};

struct LossGrad {
  double loss = 0;       // data term + gauge term
  double data_loss = 0;  // mean squared forcing error
  Net grad_a, grad_b;
};

/// L = mean_i [x''_i + F_a * x'_i + F_b - F_i]^2   (position family)
/// L = mean_i [x''_i + F_a(x'_i) + F_b(x_i) - F_i]^2 + lambda_c F_b(0)^2
///                                                 (velocity family)
LossGrad loss_and_grads(const Net& net_a, const Net& net_b, const Dataset& ds,
                        ModelFamily family, double lambda_c);

/// Buffers reused across epochs by the in-place overload.
struct LossWorkspace {
  Net::Cache cache_a, cache_b, cache_0;
};

/// Same as above, writing into `out` (grad_a/grad_b must already have the
/// networks' shapes).
void loss_and_grads(const Net& net_a, const Net& net_b, const Dataset& ds,
                    ModelFamily family, double lambda_c, LossGrad& out,
                    LossWorkspace& ws);

/// Least-squares lines through `points` evenly spaced evaluations of f on
/// the outer `fraction` of the domain at each edge.
EdgeLines fit_edge_extrapolation(const std::function<double(double)>& f,
                                 const Domain& domain, double fraction = 0.05,
                                 int points = 21);

struct NeuralFit {
  IdentifiedModel model;
  std::shared_ptr<const Net> net_a, net_b;
  Domain domain_a, domain_b;
  EdgeLines edges_a, edges_b;
  TrainConfig config;
  double final_loss = 0;
  long epochs = 0;  // parameter updates performed
  std::vector<std::pair<long, double>> history;  // (epoch, loss)
};

/// Wraps trained networks as curves with linear edge extrapolation.
IdentifiedModel neural_model(ModelFamily family,
                             std::shared_ptr<const Net> net_a,
                             std::shared_ptr<const Net> net_b,
                             const Domain& domain_a, const Domain& domain_b,
                             const EdgeLines& edges_a,
                             const EdgeLines& edges_b);

/// Trains both networks until max_epochs or loss <= loss_stop. Throws
/// TrainingFailure if the loss becomes non-finite.
NeuralFit train(const Dataset& ds, ModelFamily family,
                const TrainConfig& cfg = {});

/// Text export: one `nncc v1 ...` header line, then one parameter per line
/// (network a then b; per layer, weights row-major then biases).
void write_neural_model(std::ostream& os, const NeuralFit& fit);
NeuralFit read_neural_model(std::istream& is);

}  // namespace ccident

#endif  // CCIDENT_NN_CC_HPP
