#pragma once

// Acoustic front end: MFCC and linear cepstral coefficients from 16 kHz audio,
// delta features, 100 Hz -> 50 Hz alignment with the contour frame rate, and
// per-session z-normalization.
//
// Framing: frame t covers samples [160 t, 160 t + 400). Each frame is
// pre-emphasized on its own (y[0] = (1 - a) x[0], y[n] = x[n] - a x[n-1]),
// multiplied by a symmetric Hann window and zero-padded to 512 points, so a
// shift of the audio by one hop shifts the feature rows by exactly one.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vt/datamodel.hpp"

namespace vt::features {

enum class FeatureKind { kMfcc39, kLcc30, kEmbedding768 };

int dimension(FeatureKind kind);
std::string_view kind_name(FeatureKind kind);
FeatureKind parse_kind(std::string_view name);

struct StftConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int sample_rate = kAudioRateHz;
  int fft_size = 512;
  double pre_emphasis = 0.97;

  int window_samples() const;
  int hop_samples() const;
  double frame_rate_hz() const { return 1000.0 / hop_ms; }
  void validate() const;
};

inline constexpr int kMelFilters = 26;
inline constexpr int kMfccCoefficients = 13;
inline constexpr int kLccCoefficients = 30;
inline constexpr double kLogFloor = 1e-10;

// 1 + floor((n - window) / hop), or 0 when shorter than one window.
int frame_count(std::size_t n_samples, const StftConfig& cfg);

// Pre-emphasis + Hann + zero padding for frame t; length fft_size.
std::vector<double> windowed_frame(std::span<const double> audio, int t, const StftConfig& cfg);

// Triangular mel filters between 0 Hz and Nyquist, each scaled to unit area
// in Hz; shape n_filters x (fft_size / 2 + 1).
Matrix mel_filterbank(const StftConfig& cfg, int n_filters = kMelFilters);

// Orthonormal DCT-II; rows are basis functions (n_out x n_in).
Matrix dct_matrix(int n_out, int n_in);

// Real cepstrum c[0..n_coeffs) of one (already windowed) frame: inverse DFT of
// the floored log magnitude spectrum. The frame is zero-padded to fft_size.
std::vector<double> real_cepstrum(std::span<const double> frame, int n_coeffs, int fft_size = 512);

// T x 13 at the hop rate (c0 is the DCT c0, not frame energy).
Matrix mfcc(std::span<const double> audio, const StftConfig& cfg = {});
// T x 30 at the hop rate.
Matrix lcc(std::span<const double> audio, const StftConfig& cfg = {});

// [static | delta | delta-delta] using a +-2 frame regression with edge
// frames replicated.
Matrix add_deltas(const Matrix& m);

// Row i = mean of rows 2i and 2i+1; a trailing odd row is dropped.
Matrix pair_average(const Matrix& m);
// 100 Hz features are pair-averaged, 50 Hz features pass through unchanged.
Matrix align_to_50hz(const Matrix& m, double frame_rate_hz);

// Full front end for one utterance at 50 Hz: mfcc39 = MFCC + deltas, lcc30 = LCC.
Matrix extract(FeatureKind kind, std::span<const double> audio, const StftConfig& cfg = {});

inline constexpr double kStdFloor = 1e-8;

struct SessionStats {
  std::string session_id;
  Vector mean;
  Vector std;
  std::vector<int> floored_columns;  // columns whose std was raised to kStdFloor
};

struct SessionMatrix {
  std::string session_id;
  const Matrix* values = nullptr;
};

// Statistics of one session pooled over all its matrices (population std).
SessionStats fit_stats(std::span<const Matrix* const> matrices, const std::string& session_id);
// One SessionStats per distinct session id; sessions are never pooled together.
std::map<std::string, SessionStats> fit_session_stats(std::span<const SessionMatrix> data);

Matrix apply_norm(const Matrix& m, const SessionStats& stats);
Matrix invert_norm(const Matrix& z, const SessionStats& stats);

}  // namespace vt::features
