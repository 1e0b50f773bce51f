#pragma once

// Synthetic corpus with a planted acoustic-articulatory link: four smooth
// latent trajectories drive both the contours (linearly) and a three-formant
// resonator filter applied to noise.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vt/datamodel.hpp"
#include "vt/experiment.hpp"

namespace vt::synth {

inline constexpr int kLatents = 4;

struct SynthOptions {
  std::uint64_t seed = 0;
  int acquisitions = 20;
  int frames = 500;
  int sessions = 2;
  double contour_noise_mm = 0.02;
};

struct SynthAcquisition {
  Acquisition acquisition;  // all ten articulators, audio and phones
  Matrix latent;            // frames x 4
};

// Audio has 320 * frames + 240 samples so the 100 Hz front end yields exactly
// 2 * frames rows.
std::vector<SynthAcquisition> generate(const SynthOptions& opts);

// Writes wav/, contours/, phones/ and corpus.json under dir.
experiment::Corpus write_corpus(const std::filesystem::path& dir, const std::vector<SynthAcquisition>& data);
experiment::Corpus synth_corpus(const std::filesystem::path& dir, const SynthOptions& opts);

}  // namespace vt::synth
