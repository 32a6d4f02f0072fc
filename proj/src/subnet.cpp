#include "monogrove/subnet.hpp"

#include <cmath>

namespace monogrove {

namespace {

double act_value(Activation a, double z) {
  return a == Activation::Logistic ? 1.0 / (1.0 + std::exp(-z)) : z;
}

// act, act', act'' elementwise. For the logistic s = a(1-a), s' = a(1-a)(1-2a).
void act_derivs(Activation act, const Vec& z, Vec& a, Vec& s, Vec& t) {
  if (act == Activation::Identity) {
    a = z;
    s = Vec::Ones(z.size());
    t = Vec::Zero(z.size());
    return;
  }
  a = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  s = a.array() * (1.0 - a.array());
  t = s.array() * (1.0 - 2.0 * a.array());
}

}  // namespace

const char* activation_name(Activation a) {
  return a == Activation::Logistic ? "logistic" : "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "logistic") return Activation::Logistic;
  if (name == "identity") return Activation::Identity;
  throw SchemaError("unknown activation: " + name);
}

int SubnetParams::num_params() const {
  int n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<int>(weights[l].size() + biases[l].size());
  return n + static_cast<int>(out_weights.size()) + 1;
}

void SubnetParams::check() const {
  if (weights.size() != biases.size())
    throw SchemaError("subnet: weight/bias layer count mismatch");
  if (weights.empty() || weights.size() > 2)
    throw SchemaError("subnet: expected 1 or 2 hidden layers, got " +
                      std::to_string(weights.size()));
  Eigen::Index fan_in = weights[0].cols();
  if (fan_in < 1) throw SchemaError("subnet: input dimension must be >= 1");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() < 1) throw SchemaError("subnet: hidden width must be >= 1");
    if (weights[l].cols() != fan_in)
      throw SchemaError("subnet: layer " + std::to_string(l) + " fan-in mismatch");
    if (biases[l].size() != weights[l].rows())
      throw SchemaError("subnet: layer " + std::to_string(l) + " bias size mismatch");
    fan_in = weights[l].rows();
  }
  if (out_weights.size() != fan_in)
    throw SchemaError("subnet: output weight size mismatch");
}

SubnetParams make_subnet(int input_dim, const std::vector<int>& hidden, Activation act) {
  SubnetParams p;
  p.activation = act;
  int fan_in = input_dim;
  for (int h : hidden) {
    p.weights.push_back(Mat::Zero(h, fan_in));
    p.biases.push_back(Vec::Zero(h));
    fan_in = h;
  }
  p.out_weights = Vec::Zero(fan_in);
  p.out_bias = 0.0;
  p.check();
  return p;
}

SubnetParams random_subnet(int input_dim, const std::vector<int>& hidden, Activation act,
                           Rng& rng, double scale) {
  SubnetParams p = make_subnet(input_dim, hidden, act);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    double sd = scale / std::sqrt(static_cast<double>(p.weights[l].cols()));
    for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j) p.weights[l](i, j) = sd * rng.normal();
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l](i) = sd * rng.normal();
  }
  double sd = scale / std::sqrt(static_cast<double>(p.out_weights.size()));
  for (Eigen::Index i = 0; i < p.out_weights.size(); ++i) p.out_weights(i) = sd * rng.normal();
  p.out_bias = sd * rng.normal();
  return p;
}

double eval(const SubnetParams& p, ConstRefVec& x) {
  if (x.size() != p.input_dim())
    throw SchemaError("subnet eval: input has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(p.input_dim()));
  Vec a = x;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Vec z = p.weights[l] * a + p.biases[l];
    a = z.unaryExpr([&](double v) { return act_value(p.activation, v); });
  }
  return p.out_weights.dot(a) + p.out_bias;
}

Vec eval_batch(const SubnetParams& p, ConstRefMat& X) {
  if (X.cols() != p.input_dim())
    throw SchemaError("subnet eval_batch: input has " + std::to_string(X.cols()) +
                      " columns, expected " + std::to_string(p.input_dim()));
  Mat A = X;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Mat Z = (A * p.weights[l].transpose()).rowwise() + p.biases[l].transpose();
    if (p.activation == Activation::Logistic)
      A = Z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    else
      A = std::move(Z);
  }
  return (A * p.out_weights).array() + p.out_bias;
}

// The flattening writes blocks in this order (layer-major, weights row-major,
// bias after its layer's weights, affine head last).
Vec flatten_params(const SubnetParams& p) {
  Vec v(p.num_params());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const Mat& W = p.weights[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) v(k++) = W(i, j);
    v.segment(k, p.biases[l].size()) = p.biases[l];
    k += p.biases[l].size();
  }
  v.segment(k, p.out_weights.size()) = p.out_weights;
  k += p.out_weights.size();
  v(k) = p.out_bias;
  return v;
}

SubnetParams unflatten_params(const SubnetParams& like, ConstRefVec& theta) {
  if (theta.size() != like.num_params())
    throw SchemaError("unflatten: got " + std::to_string(theta.size()) + " values, expected " +
                      std::to_string(like.num_params()));
  SubnetParams p = like;
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Mat& W = p.weights[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = theta(k++);
    p.biases[l] = theta.segment(k, p.biases[l].size());
    k += p.biases[l].size();
  }
  p.out_weights = theta.segment(k, p.out_weights.size());
  k += p.out_weights.size();
  p.out_bias = theta(k);
  return p;
}

namespace {

// One hidden layer:
//   z = W1 x + b1, a = act(z), f = w2 . a + b2
//   df/dx            = W1^T (w2 ∘ s)
//   dg_j/dW1_{h,k}   = δ_{jk} w2_h s_h + W1_{h,j} w2_h s'_h x_k
//   dg_j/db1_h       = W1_{h,j} w2_h s'_h
//   dg_j/dw2_h       = W1_{h,j} s_h
// with s = act'(z), s' = act''(z) and g = df/dx.
EvalRecord eval_full_1(const SubnetParams& p, ConstRefVec& x) {
  const Mat& W1 = p.weights[0];
  const Vec& w2 = p.out_weights;
  const Eigen::Index d = W1.cols(), H = W1.rows();
  Vec z = W1 * x + p.biases[0];
  Vec a, s, t;
  act_derivs(p.activation, z, a, s, t);

  EvalRecord r;
  r.value = w2.dot(a) + p.out_bias;

  Vec ws = w2.array() * s.array();        // w2 ∘ s
  Vec wt = w2.array() * t.array();        // w2 ∘ s'
  r.input_grad = W1.transpose() * ws;

  const Eigen::Index P = p.num_params();
  r.value_param_grad.resize(P);
  Eigen::Index k = 0;
  // dW1 = (w2 ∘ s) x^T, row-major
  for (Eigen::Index h = 0; h < H; ++h)
    for (Eigen::Index j = 0; j < d; ++j) r.value_param_grad(k++) = ws(h) * x(j);
  r.value_param_grad.segment(k, H) = ws;  // db1
  k += H;
  r.value_param_grad.segment(k, H) = a;   // dw2
  k += H;
  r.value_param_grad(k) = 1.0;            // db2

  r.input_grad_param_jac = Mat::Zero(d, P);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto row = r.input_grad_param_jac.row(j);
    Eigen::Index o = 0;
    for (Eigen::Index h = 0; h < H; ++h)
      for (Eigen::Index kk = 0; kk < d; ++kk) {
        double v = W1(h, j) * wt(h) * x(kk);
        if (kk == j) v += ws(h);
        row(o++) = v;
      }
    for (Eigen::Index h = 0; h < H; ++h) row(o++) = W1(h, j) * wt(h);        // b1
    for (Eigen::Index h = 0; h < H; ++h) row(o++) = W1(h, j) * s(h);         // w2
    // out_bias column stays zero
  }
  return r;
}

// Two hidden layers:
//   z1 = W1 x + b1, a1 = act(z1); z2 = W2 a1 + b2, a2 = act(z2); f = w3 . a2 + b3
// Writing u = w3 ∘ s2, v = W2^T u, m = s1 ∘ v, the input gradient is
// g = W1^T m. For each input coordinate j let c_j = s1 ∘ W1.col(j); then with
// M = W2^T diag(w3 ∘ s2') W2 the parameter derivatives of g_j are
//   dg_j/dw3   = s2 ∘ (W2 c_j)
//   dg_j/dW2   = u c_j^T + ((w3 ∘ s2') ∘ (W2 c_j)) a1^T
//   dg_j/db2   = (w3 ∘ s2') ∘ (W2 c_j)
//   dg_j/dW1   = e_j x^T plus m added to column j,  e_j = s1' ∘ v ∘ W1.col(j) + s1 ∘ (M c_j)
//   dg_j/db1   = e_j
EvalRecord eval_full_2(const SubnetParams& p, ConstRefVec& x) {
  const Mat& W1 = p.weights[0];
  const Mat& W2 = p.weights[1];
  const Vec& w3 = p.out_weights;
  const Eigen::Index d = W1.cols(), H1 = W1.rows(), H2 = W2.rows();

  Vec z1 = W1 * x + p.biases[0];
  Vec a1, s1, t1;
  act_derivs(p.activation, z1, a1, s1, t1);
  Vec z2 = W2 * a1 + p.biases[1];
  Vec a2, s2, t2;
  act_derivs(p.activation, z2, a2, s2, t2);

  EvalRecord r;
  r.value = w3.dot(a2) + p.out_bias;

  Vec u = w3.array() * s2.array();
  Vec wt2 = w3.array() * t2.array();
  Vec v = W2.transpose() * u;
  Vec m = s1.array() * v.array();
  r.input_grad = W1.transpose() * m;

  const Eigen::Index P = p.num_params();
  const Eigen::Index oW1 = 0, ob1 = H1 * d, oW2 = ob1 + H1, ob2 = oW2 + H2 * H1,
                     ow3 = ob2 + H2, ob3 = ow3 + H2;

  r.value_param_grad.resize(P);
  Eigen::Index k = 0;
  for (Eigen::Index h = 0; h < H1; ++h)
    for (Eigen::Index j = 0; j < d; ++j) r.value_param_grad(k++) = m(h) * x(j);
  r.value_param_grad.segment(k, H1) = m;
  k += H1;
  for (Eigen::Index h = 0; h < H2; ++h)
    for (Eigen::Index j = 0; j < H1; ++j) r.value_param_grad(k++) = u(h) * a1(j);
  r.value_param_grad.segment(k, H2) = u;
  k += H2;
  r.value_param_grad.segment(k, H2) = a2;
  k += H2;
  r.value_param_grad(k) = 1.0;

  Mat M = W2.transpose() * wt2.asDiagonal() * W2;  // H1 x H1, symmetric

  r.input_grad_param_jac = Mat::Zero(d, P);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto row = r.input_grad_param_jac.row(j);
    Vec cj = s1.array() * W1.col(j).array();
    Vec W2cj = W2 * cj;                               // H2
    Vec db2 = wt2.array() * W2cj.array();             // H2
    Vec ej = (t1.array() * v.array() * W1.col(j).array()).matrix() + (s1.array() * (M * cj).array()).matrix();

    for (Eigen::Index h = 0; h < H1; ++h)
      for (Eigen::Index kk = 0; kk < d; ++kk) {
        double val = ej(h) * x(kk);
        if (kk == j) val += m(h);
        row(oW1 + h * d + kk) = val;
      }
    row.segment(ob1, H1) = ej.transpose();
    for (Eigen::Index h = 0; h < H2; ++h)
      for (Eigen::Index kk = 0; kk < H1; ++kk)
        row(oW2 + h * H1 + kk) = u(h) * cj(kk) + db2(h) * a1(kk);
    row.segment(ob2, H2) = db2.transpose();
    row.segment(ow3, H2) = (s2.array() * W2cj.array()).matrix().transpose();
    row(ob3) = 0.0;
  }
  return r;
}

}  // namespace

EvalRecord eval_full(const SubnetParams& p, ConstRefVec& x) {
  if (x.size() != p.input_dim())
    throw SchemaError("subnet eval_full: input has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(p.input_dim()));
  return p.hidden_layers() == 1 ? eval_full_1(p, x) : eval_full_2(p, x);
}

Vec weighted_param_grad(const SubnetParams& p, ConstRefMat& X, ConstRefVec& w) {
  if (X.cols() != p.input_dim() || X.rows() != w.size())
    throw SchemaError("weighted_param_grad: shape mismatch");
  const Eigen::Index n = X.rows();
  Vec g = Vec::Zero(p.num_params());

  if (p.hidden_layers() == 1) {
    const Mat& W1 = p.weights[0];
    const Eigen::Index d = W1.cols(), H = W1.rows();
    Mat Z = (X * W1.transpose()).rowwise() + p.biases[0].transpose();  // n x H
    Mat A(n, H), S(n, H);
    if (p.activation == Activation::Logistic) {
      A = Z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      S = A.array() * (1.0 - A.array());
    } else {
      A = Z;
      S.setOnes();
    }
    // T_ih = w_i w2_h s_ih
    Mat T = S.array() * (w * p.out_weights.transpose()).array();
    Mat dW1 = T.transpose() * X;  // H x d
    Eigen::Index k = 0;
    for (Eigen::Index h = 0; h < H; ++h)
      for (Eigen::Index j = 0; j < d; ++j) g(k++) = dW1(h, j);
    g.segment(k, H) = T.colwise().sum();
    k += H;
    g.segment(k, H) = A.transpose() * w;
    k += H;
    g(k) = w.sum();
    return g;
  }

  const Mat& W1 = p.weights[0];
  const Mat& W2 = p.weights[1];
  const Eigen::Index d = W1.cols(), H1 = W1.rows(), H2 = W2.rows();
  Mat Z1 = (X * W1.transpose()).rowwise() + p.biases[0].transpose();
  Mat A1(n, H1), S1(n, H1);
  if (p.activation == Activation::Logistic) {
    A1 = Z1.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    S1 = A1.array() * (1.0 - A1.array());
  } else {
    A1 = Z1;
    S1.setOnes();
  }
  Mat Z2 = (A1 * W2.transpose()).rowwise() + p.biases[1].transpose();
  Mat A2(n, H2), S2(n, H2);
  if (p.activation == Activation::Logistic) {
    A2 = Z2.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    S2 = A2.array() * (1.0 - A2.array());
  } else {
    A2 = Z2;
    S2.setOnes();
  }
  Mat D2 = S2.array() * (w * p.out_weights.transpose()).array();  // n x H2, w_i w3_h s2_ih
  Mat D1 = S1.array() * (D2 * W2).array();                        // n x H1

  Mat dW1 = D1.transpose() * X;
  Mat dW2 = D2.transpose() * A1;
  Eigen::Index k = 0;
  for (Eigen::Index h = 0; h < H1; ++h)
    for (Eigen::Index j = 0; j < d; ++j) g(k++) = dW1(h, j);
  g.segment(k, H1) = D1.colwise().sum();
  k += H1;
  for (Eigen::Index h = 0; h < H2; ++h)
    for (Eigen::Index j = 0; j < H1; ++j) g(k++) = dW2(h, j);
  g.segment(k, H2) = D2.colwise().sum();
  k += H2;
  g.segment(k, H2) = A2.transpose() * w;
  k += H2;
  g(k) = w.sum();
  return g;
}

}  // namespace monogrove
