#include <cmath>

#include "vt/error.hpp"
#include "vt/network.hpp"

namespace vt::nn {
namespace {

using Mat = Eigen::MatrixXd;
using Map = Eigen::Map<const Eigen::MatrixXd>;
using GradMap = Eigen::Map<Eigen::MatrixXd>;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct CellParams {
  Map W, U, b;
};

CellParams cell(const BiLstmModel& m, const std::string& prefix) {
  return {m.view(m.tensor(prefix + "W")), m.view(m.tensor(prefix + "U")), m.view(m.tensor(prefix + "b"))};
}

// Activated gates [i; f; g; o], cell states and outputs for one direction.
struct CellTrace {
  Mat gates;  // 4L x T
  Mat c;      // L x T
  Mat h;      // L x T
};

CellTrace run_cell(const CellParams& p, const Mat& x, bool reverse) {
  const Eigen::Index T = x.cols();
  const Eigen::Index L = p.U.cols();
  CellTrace tr{Mat(4 * L, T), Mat(L, T), Mat(L, T)};
  Mat pre = p.W * x;
  pre.colwise() += p.b.col(0);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd z(4 * L);
  for (Eigen::Index s = 0; s < T; ++s) {
    const Eigen::Index t = reverse ? T - 1 - s : s;
    z.noalias() = pre.col(t) + p.U * h_prev;
    auto g = tr.gates.col(t);
    for (Eigen::Index k = 0; k < L; ++k) {
      g[k] = sigmoid(z[k]);
      g[L + k] = sigmoid(z[L + k]);
      g[2 * L + k] = std::tanh(z[2 * L + k]);
      g[3 * L + k] = sigmoid(z[3 * L + k]);
      const double c = g[L + k] * c_prev[k] + g[k] * g[2 * L + k];
      tr.c(k, t) = c;
      tr.h(k, t) = g[3 * L + k] * std::tanh(c);
    }
    h_prev = tr.h.col(t);
    c_prev = tr.c.col(t);
  }
  return tr;
}

// Backpropagates dH (L x T, gradient w.r.t. this direction's outputs) through
// the cell; accumulates parameter gradients and returns the input gradient.
Mat backprop_cell(const CellParams& p, const Mat& x, const CellTrace& tr, const Mat& dH, bool reverse,
                  GradMap dW, GradMap dU, GradMap db) {
  const Eigen::Index T = x.cols();
  const Eigen::Index L = p.U.cols();
  Mat dZ(4 * L, T);
  Mat h_prev_all = Mat::Zero(L, T);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(L);
  for (Eigen::Index s = T - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? T - 1 - s : s;
    const Eigen::Index t_prev = reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;
    if (has_prev) h_prev_all.col(t) = tr.h.col(t_prev);
    const auto g = tr.gates.col(t);
    auto dz = dZ.col(t);
    for (Eigen::Index k = 0; k < L; ++k) {
      const double i = g[k], f = g[L + k], gg = g[2 * L + k], o = g[3 * L + k];
      const double c_prev = has_prev ? tr.c(k, t_prev) : 0.0;
      const double tc = std::tanh(tr.c(k, t));
      const double dh = dH(k, t) + dh_next[k];
      const double dc = dh * o * (1.0 - tc * tc) + dc_next[k];
      dz[k] = dc * gg * i * (1.0 - i);
      dz[L + k] = dc * c_prev * f * (1.0 - f);
      dz[2 * L + k] = dc * i * (1.0 - gg * gg);
      dz[3 * L + k] = dh * tc * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    dh_next.noalias() = p.U.transpose() * dz;
  }
  dW.noalias() += dZ * x.transpose();
  dU.noalias() += dZ * h_prev_all.transpose();
  db.col(0) += dZ.rowwise().sum();
  return p.W.transpose() * dZ;
}

struct BiTrace {
  CellTrace fwd, bwd;
  Mat out;  // 2L x T
};

BiTrace run_bilayer(const BiLstmModel& m, const std::string& layer, const Mat& x) {
  BiTrace tr;
  tr.fwd = run_cell(cell(m, layer + ".fwd."), x, false);
  tr.bwd = run_cell(cell(m, layer + ".bwd."), x, true);
  const Eigen::Index L = tr.fwd.h.rows();
  tr.out.resize(2 * L, x.cols());
  tr.out.topRows(L) = tr.fwd.h;
  tr.out.bottomRows(L) = tr.bwd.h;
  return tr;
}

GradMap grad_view(const BiLstmModel& m, std::span<double> g, const std::string& name) {
  const auto& t = m.tensor(name);
  return {g.data() + t.offset, t.rows, t.cols};
}

Mat backprop_bilayer(const BiLstmModel& m, const std::string& layer, const Mat& x, const BiTrace& tr,
                     const Mat& dOut, std::span<double> g) {
  const Eigen::Index L = tr.fwd.h.rows();
  Mat dx = backprop_cell(cell(m, layer + ".fwd."), x, tr.fwd, dOut.topRows(L), false,
                         grad_view(m, g, layer + ".fwd.W"), grad_view(m, g, layer + ".fwd.U"),
                         grad_view(m, g, layer + ".fwd.b"));
  dx += backprop_cell(cell(m, layer + ".bwd."), x, tr.bwd, dOut.bottomRows(L), true,
                      grad_view(m, g, layer + ".bwd.W"), grad_view(m, g, layer + ".bwd.U"),
                      grad_view(m, g, layer + ".bwd.b"));
  return dx;
}

struct ForwardTrace {
  Mat x, a1, a2;
  BiTrace l1, l2;
  Mat y;  // output x T
};

ForwardTrace run_forward(const BiLstmModel& m, const Matrix& input) {
  if (input.cols() != m.dims().input) {
    throw StructuralError("model expects " + std::to_string(m.dims().input) + " input features, got " +
                          std::to_string(input.cols()));
  }
  if (input.rows() < 1) throw StructuralError("input sequence is empty");
  ForwardTrace tr;
  tr.x = input.transpose();
  tr.a1 = m.view(m.tensor("dense1.W")) * tr.x;
  tr.a1.colwise() += m.view(m.tensor("dense1.b")).col(0);
  tr.a1 = tr.a1.array().tanh().matrix();
  tr.a2 = m.view(m.tensor("dense2.W")) * tr.a1;
  tr.a2.colwise() += m.view(m.tensor("dense2.b")).col(0);
  tr.a2 = tr.a2.array().tanh().matrix();
  tr.l1 = run_bilayer(m, "lstm1", tr.a2);
  tr.l2 = run_bilayer(m, "lstm2", tr.l1.out);
  tr.y = m.view(m.tensor("out.W")) * tr.l2.out;
  tr.y.colwise() += m.view(m.tensor("out.b")).col(0);
  return tr;
}

void check_target(const BiLstmModel& m, const Matrix& x, const Matrix& y) {
  if (y.rows() != x.rows() || y.cols() != m.dims().output) {
    throw StructuralError("target shape " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                          " does not match " + std::to_string(x.rows()) + "x" + std::to_string(m.dims().output));
  }
}

}  // namespace

Matrix forward(const BiLstmModel& model, const Matrix& x) { return run_forward(model, x).y.transpose(); }

double mse_loss(const Matrix& y_hat, const Matrix& y) {
  if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols()) throw StructuralError("mse_loss: shape mismatch");
  if (y.cols() % kCoordsPerArticulator != 0) throw StructuralError("mse_loss: width is not whole articulators");
  if (y.rows() == 0) throw StructuralError("mse_loss: no frames");
  const Eigen::Index groups = y.cols() / kCoordsPerArticulator;
  double total = 0.0;
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    double frame = 0.0;
    for (Eigen::Index a = 0; a < groups; ++a) {
      const auto d = y_hat.row(t).segment(a * kCoordsPerArticulator, kCoordsPerArticulator) -
                     y.row(t).segment(a * kCoordsPerArticulator, kCoordsPerArticulator);
      frame += d.squaredNorm() / kCoordsPerArticulator;
    }
    total += frame;
  }
  return total / static_cast<double>(y.rows());
}

double accumulate_summed_gradient(const BiLstmModel& m, const Matrix& x, const Matrix& y, std::span<double> g) {
  check_target(m, x, y);
  if (g.size() != m.size()) throw StructuralError("gradient buffer size mismatch");
  const ForwardTrace tr = run_forward(m, x);
  const Mat diff = tr.y - y.transpose();
  const double summed_loss = diff.squaredNorm() / kCoordsPerArticulator;

  const Mat dY = diff * (2.0 / kCoordsPerArticulator);
  grad_view(m, g, "out.W").noalias() += dY * tr.l2.out.transpose();
  grad_view(m, g, "out.b").col(0) += dY.rowwise().sum();
  const Mat dL2 = m.view(m.tensor("out.W")).transpose() * dY;
  const Mat dL1 = backprop_bilayer(m, "lstm2", tr.l1.out, tr.l2, dL2, g);
  const Mat dA2 = backprop_bilayer(m, "lstm1", tr.a2, tr.l1, dL1, g);

  const Mat dP2 = dA2.array() * (1.0 - tr.a2.array().square());
  grad_view(m, g, "dense2.W").noalias() += dP2 * tr.a1.transpose();
  grad_view(m, g, "dense2.b").col(0) += dP2.rowwise().sum();
  const Mat dA1 = m.view(m.tensor("dense2.W")).transpose() * dP2;
  const Mat dP1 = dA1.array() * (1.0 - tr.a1.array().square());
  grad_view(m, g, "dense1.W").noalias() += dP1 * tr.x.transpose();
  grad_view(m, g, "dense1.b").col(0) += dP1.rowwise().sum();
  return summed_loss;
}

Gradient backward(const BiLstmModel& model, const Matrix& x, const Matrix& y) {
  Gradient out;
  out.values.assign(model.size(), 0.0);
  const double summed = accumulate_summed_gradient(model, x, y, out.values);
  const auto frames = static_cast<double>(x.rows());
  for (double& v : out.values) v /= frames;
  out.loss = summed / frames;
  return out;
}

}  // namespace vt::nn
