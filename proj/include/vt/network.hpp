#pragma once

// Bi-LSTM contour regressor:
//   input F -> dense(tanh) -> dense(tanh) -> BiLSTM -> BiLSTM -> linear 800.
// All parameters live in one flat f64 buffer so optimizers, checkpoints and
// gradient checks can treat them uniformly. Tensors are column-major views
// into that buffer.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vt/datamodel.hpp"

namespace vt::nn {

struct ModelDims {
  int input = 30;
  int dense1 = 300;
  int dense2 = 300;
  int lstm = 300;  // per direction
  int output = kFrameVectorSize;

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

// LSTM gate blocks are stacked [input, forget, cell, output] along rows.
class BiLstmModel {
 public:
  BiLstmModel() = default;
  explicit BiLstmModel(const ModelDims& dims);  // all parameters zero

  // Uniform(+-sqrt(1/fan_in)) weights, zero biases except forget gates (+1).
  static BiLstmModel initialize(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const TensorSpec& tensor(const std::string& name) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  Eigen::Map<Eigen::MatrixXd> view(const TensorSpec& t) {
    return {params_.data() + t.offset, t.rows, t.cols};
  }
  Eigen::Map<const Eigen::MatrixXd> view(const TensorSpec& t) const {
    return {params_.data() + t.offset, t.rows, t.cols};
  }

  // Exchanges forward/backward cell parameters of both recurrent layers.
  void swap_directions();

  friend bool operator==(const BiLstmModel&, const BiLstmModel&) = default;

 private:
  ModelDims dims_;
  std::vector<TensorSpec> tensors_;
  std::vector<double> params_;
};

// T x input -> T x output.
Matrix forward(const BiLstmModel& model, const Matrix& x);

// Sum over the 8 articulators of their per-articulator MSE (100 coordinates
// each), averaged over frames.
double mse_loss(const Matrix& y_hat, const Matrix& y);

// Exact gradient (full BPTT) of mse_loss(forward(model, x), y); same layout as
// model.params().
struct Gradient {
  std::vector<double> values;
  double loss = 0.0;
};
Gradient backward(const BiLstmModel& model, const Matrix& x, const Matrix& y);

// Adds d/dparams of the frame-summed loss (loss * T) into `accum` and returns
// that summed loss. Building block for frame-weighted batch averaging.
double accumulate_summed_gradient(const BiLstmModel& model, const Matrix& x, const Matrix& y,
                                  std::span<double> accum);

}  // namespace vt::nn
