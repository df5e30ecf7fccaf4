#pragma once

#include <span>
#include <vector>

#include "markbench/stft.hpp"

namespace markbench::dsp {

/// Pitch-preserving time-scale modification with identity phase locking.
///
/// `rate` is a playback-rate ratio: the output has round(len / rate) samples.
/// Analysis frames advance by hop * rate, synthesis frames by hop; each
/// spectral peak's phase is propagated with its measured instantaneous
/// frequency and the bins around it keep their phase offset to the peak.
std::vector<double> phase_vocoder_stretch(std::span<const double> input, double rate,
                                          const StftParams& params = {});

}  // namespace markbench::dsp
