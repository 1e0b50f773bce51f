#include <cmath>
#include <random>

#include "vt/error.hpp"
#include "vt/network.hpp"

namespace vt::nn {

void ModelDims::validate() const {
  if (input <= 0 || dense1 <= 0 || dense2 <= 0 || lstm <= 0 || output <= 0) {
    throw UsageError("model dimensions must be positive");
  }
  if (output % kCoordsPerArticulator != 0) {
    throw UsageError("model output must be a whole number of 100-coordinate articulators");
  }
}

BiLstmModel::BiLstmModel(const ModelDims& dims) : dims_(dims) {
  dims.validate();
  const int g = 4 * dims.lstm;
  auto add = [this](std::string name, int rows, int cols) {
    std::size_t offset = tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size();
    tensors_.push_back({std::move(name), rows, cols, offset});
  };
  add("dense1.W", dims.dense1, dims.input);
  add("dense1.b", dims.dense1, 1);
  add("dense2.W", dims.dense2, dims.dense1);
  add("dense2.b", dims.dense2, 1);
  for (const char* layer : {"lstm1", "lstm2"}) {
    const int in = std::string(layer) == "lstm1" ? dims.dense2 : 2 * dims.lstm;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string p = std::string(layer) + "." + dir + ".";
      add(p + "W", g, in);
      add(p + "U", g, dims.lstm);
      add(p + "b", g, 1);
    }
  }
  add("out.W", dims.output, 2 * dims.lstm);
  add("out.b", dims.output, 1);
  params_.assign(tensors_.back().offset + tensors_.back().size(), 0.0);
}

const TensorSpec& BiLstmModel::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw StructuralError("no tensor named " + name);
}

BiLstmModel BiLstmModel::initialize(const ModelDims& dims, std::uint64_t seed) {
  BiLstmModel m(dims);
  std::mt19937_64 rng(seed);
  // 53 random bits -> [0, 1); avoids implementation-defined distributions.
  auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (const auto& t : m.tensors_) {
    auto v = m.view(t);
    const bool is_bias = t.cols == 1 && t.name.back() == 'b';
    if (is_bias) {
      if (t.name.starts_with("lstm")) v.middleRows(dims.lstm, dims.lstm).setOnes();
      continue;
    }
    const double bound = std::sqrt(1.0 / t.cols);
    for (Eigen::Index c = 0; c < v.cols(); ++c)
      for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = (2.0 * uniform01() - 1.0) * bound;
  }
  return m;
}

void BiLstmModel::swap_directions() {
  for (const char* layer : {"lstm1", "lstm2"}) {
    for (const char* part : {"W", "U", "b"}) {
      const auto& f = tensor(std::string(layer) + ".fwd." + part);
      const auto& b = tensor(std::string(layer) + ".bwd." + part);
      std::swap_ranges(params_.begin() + static_cast<std::ptrdiff_t>(f.offset),
                       params_.begin() + static_cast<std::ptrdiff_t>(f.offset + f.size()),
                       params_.begin() + static_cast<std::ptrdiff_t>(b.offset));
    }
  }
}

}  // namespace vt::nn
