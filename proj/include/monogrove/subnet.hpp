#pragma once

#include <vector>

#include "monogrove/types.hpp"

namespace monogrove {

enum class Activation { Logistic, Identity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Parameters of one scalar-valued shallow subnet: one or two hidden layers
/// followed by an affine head,
///
///   f(x) = w_out . act(W_k ... act(W_1 x + b_1) ... + b_k) + b_out.
///
/// Hidden activation is logistic by default; the identity activation makes
/// exactly linear subnets representable, which the penalty oracles use.
struct SubnetParams {
  std::vector<Mat> weights;  // weights[l]: rows = layer width, cols = fan-in
  std::vector<Vec> biases;
  Vec out_weights;           // last hidden width
  double out_bias = 0.0;
  Activation activation = Activation::Logistic;

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights[0].cols()); }
  int hidden_layers() const { return static_cast<int>(weights.size()); }
  int num_params() const;

  // Throws SchemaError unless shapes chain from input_dim to the scalar head
  // and there are 1 or 2 hidden layers of width >= 1.
  void check() const;
};

/// Value plus every derivative the penalties and certification need.
/// Parameter blocks follow the flattening order documented at
/// flatten_params(): per hidden layer the weight matrix row-major then the
/// bias, then out_weights, then out_bias.
struct EvalRecord {
  double value = 0.0;
  Vec input_grad;            // d entries, df/dx_j
  Vec value_param_grad;      // num_params entries
  Mat input_grad_param_jac;  // d x num_params, row j = d(input_grad[j])/dtheta
};

/// Zero-initialized subnet of the given shape.
SubnetParams make_subnet(int input_dim, const std::vector<int>& hidden,
                         Activation act = Activation::Logistic);

/// Random init, every weight and bias ~ N(0, scale^2 / fan_in).
SubnetParams random_subnet(int input_dim, const std::vector<int>& hidden, Activation act,
                           Rng& rng, double scale = 1.0);

double eval(const SubnetParams& p, ConstRefVec& x);

/// Forward pass over n stacked inputs (rows of X).
Vec eval_batch(const SubnetParams& p, ConstRefMat& X);

/// Exact closed-form derivatives; value equals eval(p, x).
EvalRecord eval_full(const SubnetParams& p, ConstRefVec& x);

/// sum_i w_i * dtheta f(x_i), accumulated with matrix products. This is the
/// training-loss gradient path; eval_full covers the per-point penalty path.
Vec weighted_param_grad(const SubnetParams& p, ConstRefMat& X, ConstRefVec& w);

/// Flattening order: layer-major; within a layer the weight matrix row-major,
/// then its bias; the affine head (out_weights, out_bias) last.
Vec flatten_params(const SubnetParams& p);

/// Inverse of flatten_params for a subnet shaped like `like`.
/// Throws SchemaError on length mismatch.
SubnetParams unflatten_params(const SubnetParams& like, ConstRefVec& theta);

}  // namespace monogrove
