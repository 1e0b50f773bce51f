#include "vt/features.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "vt/error.hpp"

namespace vt::features {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // |X_k|^2 for k = 0..n/2.
  std::vector<double> power(std::span<const double> frame) {
    load(frame);
    fftw_execute(forward_);
    std::vector<double> p(bins());
    for (int k = 0; k < bins(); ++k) p[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    return p;
  }

  // Inverse transform of a real, even spectrum given by its first n/2+1 bins,
  // normalized by 1/n.
  std::vector<double> inverse_even(std::span<const double> half_spectrum) {
    for (int k = 0; k < bins(); ++k) {
      out_[k][0] = half_spectrum[k];
      out_[k][1] = 0.0;
    }
    fftw_execute(inverse_);
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = in_[i] / n_;
    return x;
  }

 private:
  void load(std::span<const double> frame) {
    const std::size_t m = std::min<std::size_t>(frame.size(), n_);
    for (std::size_t i = 0; i < m; ++i) in_[i] = frame[i];
    for (int i = static_cast<int>(m); i < n_; ++i) in_[i] = 0.0;
  }

  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> log_magnitude(std::span<const double> power) {
  std::vector<double> out(power.size());
  for (std::size_t k = 0; k < power.size(); ++k) {
    out[k] = std::log(std::max(std::sqrt(power[k]), kLogFloor));
  }
  return out;
}

}  // namespace

int dimension(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc39:
      return 39;
    case FeatureKind::kLcc30:
      return 30;
    case FeatureKind::kEmbedding768:
      return 768;
  }
  return 0;
}

std::string_view kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc39:
      return "mfcc39";
    case FeatureKind::kLcc30:
      return "lcc30";
    case FeatureKind::kEmbedding768:
      return "embedding768";
  }
  return "";
}

FeatureKind parse_kind(std::string_view name) {
  for (auto k : {FeatureKind::kMfcc39, FeatureKind::kLcc30, FeatureKind::kEmbedding768}) {
    if (kind_name(k) == name) return k;
  }
  throw UsageError("unknown feature kind '" + std::string(name) + "' (mfcc39|lcc30|embedding768)");
}

int StftConfig::window_samples() const { return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0)); }
int StftConfig::hop_samples() const { return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0)); }

void StftConfig::validate() const {
  if (!(window_ms > hop_ms && hop_ms > 0.0)) throw UsageError("STFT config needs window_ms > hop_ms > 0");
  if (fft_size < window_samples() || (fft_size & (fft_size - 1)) != 0) {
    throw UsageError("fft_size must be a power of two covering the window");
  }
}

int frame_count(std::size_t n_samples, const StftConfig& cfg) {
  const auto win = static_cast<std::size_t>(cfg.window_samples());
  if (n_samples < win) return 0;
  return 1 + static_cast<int>((n_samples - win) / static_cast<std::size_t>(cfg.hop_samples()));
}

std::vector<double> windowed_frame(std::span<const double> audio, int t, const StftConfig& cfg) {
  const int win = cfg.window_samples();
  const std::size_t start = static_cast<std::size_t>(t) * cfg.hop_samples();
  std::vector<double> out(cfg.fft_size, 0.0);
  const double a = cfg.pre_emphasis;
  for (int n = 0; n < win; ++n) {
    const double x = audio[start + n];
    const double prev = n == 0 ? x : audio[start + n - 1];
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (win - 1));
    out[n] = (x - a * prev) * hann;
  }
  return out;
}

Matrix mel_filterbank(const StftConfig& cfg, int n_filters) {
  const int bins = cfg.fft_size / 2 + 1;
  const double nyquist = cfg.sample_rate / 2.0;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(nyquist);
  std::vector<double> edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) edges[i] = mel_to_hz(mel_lo + i * (mel_hi - mel_lo) / (n_filters + 1));

  Matrix fb = Matrix::Zero(n_filters, bins);
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    const double height = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      double w = 0.0;
      if (f > lo && f <= center) {
        w = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      fb(m, k) = w * height;
    }
  }
  return fb;
}

Matrix dct_matrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n_in) : std::sqrt(2.0 / n_in);
    for (int n = 0; n < n_in; ++n) d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
  }
  return d;
}

std::vector<double> real_cepstrum(std::span<const double> frame, int n_coeffs, int fft_size) {
  if (n_coeffs > fft_size) throw UsageError("more cepstral coefficients than FFT points");
  RealFft fft(fft_size);
  auto c = fft.inverse_even(log_magnitude(fft.power(frame)));
  c.resize(n_coeffs);
  return c;
}

Matrix mfcc(std::span<const double> audio, const StftConfig& cfg) {
  cfg.validate();
  const int frames = frame_count(audio.size(), cfg);
  if (frames == 0) throw StructuralError("audio shorter than one analysis window");
  const Matrix fb = mel_filterbank(cfg);
  const Matrix dct = dct_matrix(kMfccCoefficients, kMelFilters);
  RealFft fft(cfg.fft_size);
  Matrix out(frames, kMfccCoefficients);
  Vector log_mel(kMelFilters);
  for (int t = 0; t < frames; ++t) {
    const auto p = fft.power(windowed_frame(audio, t, cfg));
    const Eigen::Map<const Vector> power(p.data(), static_cast<Eigen::Index>(p.size()));
    const Vector mel = fb * power;
    for (int m = 0; m < kMelFilters; ++m) log_mel[m] = std::log(std::max(mel[m], kLogFloor));
    out.row(t) = (dct * log_mel).transpose();
  }
  return out;
}

Matrix lcc(std::span<const double> audio, const StftConfig& cfg) {
  cfg.validate();
  const int frames = frame_count(audio.size(), cfg);
  if (frames == 0) throw StructuralError("audio shorter than one analysis window");
  RealFft fft(cfg.fft_size);
  Matrix out(frames, kLccCoefficients);
  for (int t = 0; t < frames; ++t) {
    const auto c = fft.inverse_even(log_magnitude(fft.power(windowed_frame(audio, t, cfg))));
    for (int i = 0; i < kLccCoefficients; ++i) out(t, i) = c[i];
  }
  return out;
}

Matrix add_deltas(const Matrix& m) {
  const Eigen::Index T = m.rows(), F = m.cols();
  auto delta = [T, F](const Matrix& x) {
    Matrix d(T, F);
    auto row = [T](Eigen::Index t) { return std::clamp<Eigen::Index>(t, 0, T - 1); };
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index f = 0; f < F; ++f) {
        double acc = 0.0;
        for (int n = 1; n <= 2; ++n) acc += n * (x(row(t + n), f) - x(row(t - n), f));
        d(t, f) = acc / 10.0;
      }
    }
    return d;
  };
  const Matrix d1 = delta(m);
  const Matrix d2 = delta(d1);
  Matrix out(T, 3 * F);
  out << m, d1, d2;
  return out;
}

Matrix pair_average(const Matrix& m) {
  const Eigen::Index rows = m.rows() / 2;
  Matrix out(rows, m.cols());
  for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = (m.row(2 * i) + m.row(2 * i + 1)) / 2.0;
  return out;
}

Matrix align_to_50hz(const Matrix& m, double frame_rate_hz) {
  if (frame_rate_hz == kFrameRateHz) return m;
  if (frame_rate_hz == 2.0 * kFrameRateHz) return pair_average(m);
  throw StructuralError("cannot align features at " + std::to_string(frame_rate_hz) + " Hz to 50 Hz");
}

Matrix extract(FeatureKind kind, std::span<const double> audio, const StftConfig& cfg) {
  switch (kind) {
    case FeatureKind::kMfcc39:
      return align_to_50hz(add_deltas(mfcc(audio, cfg)), cfg.frame_rate_hz());
    case FeatureKind::kLcc30:
      return align_to_50hz(lcc(audio, cfg), cfg.frame_rate_hz());
    case FeatureKind::kEmbedding768:
      break;
  }
  throw UsageError("embeddings are produced by the external extractor, not computed from audio here");
}

SessionStats fit_stats(std::span<const Matrix* const> matrices, const std::string& session_id) {
  if (matrices.empty()) throw StructuralError("session " + session_id + " has no data");
  const Eigen::Index F = matrices.front()->cols();
  Eigen::Index rows = 0;
  Vector sum = Vector::Zero(F);
  for (const Matrix* m : matrices) {
    if (m->cols() != F) throw StructuralError("session " + session_id + ": inconsistent feature widths");
    rows += m->rows();
    sum += m->colwise().sum().transpose();
  }
  if (rows < 2) throw StructuralError("session " + session_id + " needs at least 2 frames");
  SessionStats s;
  s.session_id = session_id;
  s.mean = sum / static_cast<double>(rows);
  Vector ss = Vector::Zero(F);
  for (const Matrix* m : matrices) {
    ss += (m->rowwise() - s.mean.transpose()).array().square().matrix().colwise().sum().transpose();
  }
  s.std = (ss / static_cast<double>(rows)).cwiseSqrt();
  for (Eigen::Index f = 0; f < F; ++f) {
    if (!(s.std[f] >= kStdFloor)) {
      s.std[f] = kStdFloor;
      s.floored_columns.push_back(static_cast<int>(f));
    }
  }
  return s;
}

std::map<std::string, SessionStats> fit_session_stats(std::span<const SessionMatrix> data) {
  std::map<std::string, std::vector<const Matrix*>> groups;
  for (const auto& d : data) groups[d.session_id].push_back(d.values);
  std::map<std::string, SessionStats> out;
  for (const auto& [session, mats] : groups) out.emplace(session, fit_stats(mats, session));
  return out;
}

Matrix apply_norm(const Matrix& m, const SessionStats& stats) {
  if (m.cols() != stats.mean.size()) throw StructuralError("feature width does not match session stats");
  return ((m.rowwise() - stats.mean.transpose()).array().rowwise() / stats.std.transpose().array()).matrix();
}

Matrix invert_norm(const Matrix& z, const SessionStats& stats) {
  if (z.cols() != stats.mean.size()) throw StructuralError("feature width does not match session stats");
  return ((z.array().rowwise() * stats.std.transpose().array()).rowwise() + stats.mean.transpose().array())
      .matrix();
}

}  // namespace vt::features
