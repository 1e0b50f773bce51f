#include "vt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::synth {
namespace {

using std::numbers::pi;
using Anchors = std::vector<Point>;

constexpr int kSamplesPerFrame = kAudioRateHz / 50;

// Rest shapes (mm, face toward -x, y down). Point 0 of the pharyngeal wall is
// its top; the tongue runs from root (0) to tip (49).
Anchors rest_anchors(ArticulatorId id) {
  using A = ArticulatorId;
  switch (id) {
    case A::kArytenoid: return {{140, 195}, {143, 203}, {145, 210}};
    case A::kEpiglottis: return {{128, 158}, {134, 170}, {138, 182}};
    case A::kLowerLip: return {{42, 121}, {44, 132}, {50, 143}};
    case A::kPharyngealWall: return {{145, 90}, {147, 130}, {148, 170}, {148, 192}};
    case A::kVelumMidline: return {{115, 90}, {128, 96}, {136, 107}};
    case A::kTongue: return {{130, 152}, {128, 122}, {118, 102}, {100, 96}, {80, 101}, {66, 111}};
    case A::kUpperLip: return {{50, 95}, {46, 106}, {42, 117}};
    case A::kVocalFolds: return {{120, 205}, {128, 207}, {136, 208}};
    case A::kLowerIncisor: return {{56, 121}, {58, 136}, {62, 150}};
    case A::kUpperIncisor: return {{55, 116}, {58, 100}, {75, 88}, {95, 84}, {115, 88}};
  }
  return {};
}

// Uniform resampling by parameter along the anchor polyline.
Contour resample(const Anchors& a) {
  Contour c;
  const int segs = static_cast<int>(a.size()) - 1;
  for (int p = 0; p < kContourPoints; ++p) {
    const double u = static_cast<double>(p) / (kContourPoints - 1) * segs;
    const int k = std::min(segs - 1, static_cast<int>(std::floor(u)));
    const double f = u - k;
    c[p] = {a[k].x + f * (a[k + 1].x - a[k].x), a[k].y + f * (a[k + 1].y - a[k].y)};
  }
  return c;
}

double amplitude_mm(ArticulatorId id) {
  using A = ArticulatorId;
  switch (id) {
    case A::kTongue: return 3.0;
    case A::kLowerLip: return 2.5;
    case A::kUpperLip: return 1.5;
    case A::kVelumMidline: return 2.0;
    case A::kEpiglottis: return 1.2;
    case A::kArytenoid: case A::kVocalFolds: return 1.0;
    case A::kPharyngealWall: return 0.6;
    default: return 0.0;  // landmarks stay put
  }
}

struct Basis {
  // [latent][articulator] -> per-point displacement
  std::array<std::array<Contour, kNumArticulatorIds>, kLatents> d{};
};

Basis make_basis(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Basis b;
  for (int k = 0; k < kLatents; ++k) {
    for (int a = 0; a < kNumArticulatorIds; ++a) {
      const double amp = amplitude_mm(static_cast<ArticulatorId>(a));
      double cx[3], cy[3];
      for (int i = 0; i < 3; ++i) {
        cx[i] = u(rng);
        cy[i] = u(rng);
      }
      for (int p = 0; p < kContourPoints; ++p) {
        const double s = static_cast<double>(p) / (kContourPoints - 1);
        b.d[k][a][p] = {amp * (cx[0] + cx[1] * (s - 0.5) + cx[2] * std::sin(pi * s)) / 2.0,
                        amp * (cy[0] + cy[1] * (s - 0.5) + cy[2] * std::sin(pi * s)) / 2.0};
      }
    }
  }
  return b;
}

// Sum of three sinusoids between 0.8 and 3 Hz, roughly unit variance.
std::vector<double> latent_track(std::mt19937_64& rng, int n, double rate) {
  std::uniform_real_distribution<double> freq(0.8, 3.0), phase(0.0, 2 * pi), amp(0.5, 1.0);
  double f[3], ph[3], a[3], norm = 0;
  for (int i = 0; i < 3; ++i) {
    f[i] = freq(rng);
    ph[i] = phase(rng);
    a[i] = amp(rng);
    norm += a[i] * a[i] / 2;
  }
  norm = std::sqrt(norm);
  std::vector<double> out(n);
  for (int t = 0; t < n; ++t) {
    double v = 0;
    for (int i = 0; i < 3; ++i) v += a[i] * std::sin(2 * pi * f[i] * t / rate + ph[i]);
    out[t] = v / norm;
  }
  return out;
}

std::vector<PhoneSegment> make_phones(std::mt19937_64& rng, double duration) {
  static const char* kLabels[] = {"a", "e", "i", "o", "u", "p", "t", "k", "m", "n", "s", "l"};
  std::uniform_real_distribution<double> phone_len(0.06, 0.2), speech_len(1.2, 2.2), sil_len(0.2, 0.4);
  std::uniform_int_distribution<int> label(0, 11);
  std::vector<PhoneSegment> out;
  double t = 0;
  auto push = [&](std::string l, double len) {
    const double end = std::min(duration, t + len);
    if (end - t > 1e-9) out.push_back({std::move(l), t, end});
    t = end;
  };
  push("sil", sil_len(rng));
  while (t < duration - 1e-9) {
    const double stop = t + speech_len(rng);
    while (t < std::min(stop, duration) - 1e-9) push(kLabels[label(rng)], phone_len(rng));
    push("sil", sil_len(rng));
  }
  // Round to 10 ms so label files are short and exact.
  for (auto& p : out) {
    p.start_s = std::round(p.start_s * 100) / 100;
    p.end_s = std::min(duration, std::round(p.end_s * 100) / 100);
  }
  std::erase_if(out, [](const PhoneSegment& p) { return p.end_s <= p.start_s; });
  return out;
}

// Two-pole resonator with unit peak gain.
struct Resonator {
  double y1 = 0, y2 = 0;
  double step(double x, double freq_hz, double bw_hz) {
    const double r = std::exp(-pi * bw_hz / kAudioRateHz);
    const double th = 2 * pi * freq_hz / kAudioRateHz;
    const double g = (1 - r) * std::sqrt(1 - 2 * r * std::cos(2 * th) + r * r);
    const double y = g * x + 2 * r * std::cos(th) * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::vector<double> make_audio(std::mt19937_64& rng, const Matrix& z, std::span<const PhoneSegment> phones) {
  const int frames = static_cast<int>(z.rows());
  const std::size_t n = static_cast<std::size_t>(kSamplesPerFrame) * frames + 240;
  std::normal_distribution<double> noise(0.0, 1.0);
  Resonator r1, r2, r3;
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // Latent values are attached to frame centers and linearly interpolated.
    const double ft = static_cast<double>(i) / kSamplesPerFrame - 0.5;
    const int f0 = std::clamp(static_cast<int>(std::floor(ft)), 0, frames - 1);
    const int f1 = std::min(frames - 1, f0 + 1);
    const double w = std::clamp(ft - f0, 0.0, 1.0);
    double zz[kLatents];
    for (int k = 0; k < kLatents; ++k) zz[k] = (1 - w) * z(f0, k) + w * z(f1, k);
    const double time = static_cast<double>(i) / kAudioRateHz;
    while (seg < phones.size() && phones[seg].end_s <= time) ++seg;
    const bool silent = seg < phones.size() && phones[seg].label == "sil" && phones[seg].start_s <= time;
    const double gain = 0.08 * std::exp(0.3 * zz[3]) * (silent ? 0.02 : 1.0);
    double x = gain * noise(rng);
    x = r1.step(x, 600 + 180 * zz[0], 90);
    x = r2.step(x, 1500 + 350 * zz[1], 120);
    x = r3.step(x, 2600 + 300 * zz[2], 160);
    out[i] = std::clamp(4.0 * x, -0.999, 0.999);
  }
  return out;
}

std::string acq_id(int i) {
  std::ostringstream os;
  os << "acq" << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

std::vector<SynthAcquisition> generate(const SynthOptions& opts) {
  if (opts.acquisitions <= 0 || opts.frames <= 0 || opts.sessions <= 0) {
    throw UsageError("synthetic corpus sizes must be positive");
  }
  std::mt19937_64 master(opts.seed);
  const Basis basis = make_basis(master);
  std::array<Contour, kNumArticulatorIds> rest;
  for (int a = 0; a < kNumArticulatorIds; ++a) rest[a] = resample(rest_anchors(static_cast<ArticulatorId>(a)));

  std::vector<SynthAcquisition> out;
  for (int i = 0; i < opts.acquisitions; ++i) {
    std::mt19937_64 rng(master());
    SynthAcquisition s;
    auto& acq = s.acquisition;
    acq.id = acq_id(i);
    const int session = i % opts.sessions;
    acq.session_id = "s" + std::to_string(session);
    const Point offset{0.4 * session, -0.25 * session};

    s.latent.resize(opts.frames, kLatents);
    for (int k = 0; k < kLatents; ++k) {
      auto track = latent_track(rng, opts.frames, kFrameRateHz);
      for (int t = 0; t < opts.frames; ++t) s.latent(t, k) = track[t];
    }
    std::normal_distribution<double> jitter(0.0, opts.contour_noise_mm);
    for (int t = 0; t < opts.frames; ++t) {
      ContourFrame f;
      f.frame_index = t;
      for (int a = 0; a < kNumArticulatorIds; ++a) {
        Contour c = rest[a];
        const bool moving = amplitude_mm(static_cast<ArticulatorId>(a)) > 0;
        for (int p = 0; p < kContourPoints; ++p) {
          c[p].x += offset.x;
          c[p].y += offset.y;
          if (!moving) continue;
          for (int k = 0; k < kLatents; ++k) {
            c[p].x += s.latent(t, k) * basis.d[k][a][p].x;
            c[p].y += s.latent(t, k) * basis.d[k][a][p].y;
          }
          c[p].x += jitter(rng);
          c[p].y += jitter(rng);
        }
        f.set(static_cast<ArticulatorId>(a), c);
      }
      acq.frames.push_back(std::move(f));
    }
    const double duration = (static_cast<double>(kSamplesPerFrame) * opts.frames + 240) / kAudioRateHz;
    acq.phones = make_phones(rng, duration);
    acq.audio = make_audio(rng, s.latent, acq.phones);
    acq.validate();
    out.push_back(std::move(s));
  }
  return out;
}

experiment::Corpus write_corpus(const std::filesystem::path& dir, const std::vector<SynthAcquisition>& data) {
  namespace fs = std::filesystem;
  for (const char* sub : {"wav", "contours", "phones"}) fs::create_directories(dir / sub);
  experiment::Corpus corpus;
  corpus.root = dir;
  for (const auto& s : data) {
    const auto& a = s.acquisition;
    experiment::CorpusEntry e{a.id, a.session_id, fs::path("wav") / (a.id + ".wav"),
                              fs::path("contours") / (a.id + ".json"), fs::path("phones") / (a.id + ".lab")};
    io::write_wav_pcm16(dir / e.wav, a.audio);
    io::write_contours(dir / e.contours, {a.id, a.session_id, kReferencePixelMm, a.frames});
    io::write_phone_labels(dir / e.phones, a.phones);
    corpus.entries.push_back(e);
  }
  experiment::write_corpus(dir / "corpus.json", corpus);
  return corpus;
}

experiment::Corpus synth_corpus(const std::filesystem::path& dir, const SynthOptions& opts) {
  return write_corpus(dir, generate(opts));
}

}  // namespace vt::synth
