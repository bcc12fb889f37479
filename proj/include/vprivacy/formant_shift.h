// vprivacy/formant_shift.h

// Copyright 2026 The vprivacy Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Waveform anonymization by LPC pole-angle warping.
//
// Each frame is Hann-windowed and modeled by an all-pole filter
// 1 / A(z), A(z) = 1 - sum_k a_k z^-k.  The poles (companion-matrix
// eigenvalues) are moved from angle phi to phi^alpha, the residual is
// re-filtered through the warped filter, and frames are overlap-added with
// normalization by the summed analysis windows.

#ifndef VPRIVACY_FORMANT_SHIFT_H_
#define VPRIVACY_FORMANT_SHIFT_H_

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace vprivacy {

/// Mono audio, samples nominally in [-1, 1].
struct WaveBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;
};

struct LpcFrame {
  std::vector<double> coeffs;      // a_1 .. a_p
  std::vector<double> excitation;  // prediction residual
  int frame_index = 0;
};

struct ShiftConfig {
  double alpha = 0.8;
  int lpc_order = 20;
  int frame_len = 400;  // 25 ms at 16 kHz
  int hop = 160;        // 10 ms at 16 kHz

  /// 25 ms frames, 10 ms hop, order 20 scaled with the rate.
  static ShiftConfig ForSampleRate(int sample_rate, double alpha = 0.8);
  void Validate() const;
};

/// Largest pole magnitude allowed after warping.
inline constexpr double kMaxPoleMagnitude = 0.998;

/// Autocorrelation LPC via Levinson-Durbin.  An all-zero frame gives zero
/// coefficients and a zero residual.
LpcFrame LpcAnalyze(std::span<const double> frame, int order);

/// e[n] = x[n] - sum_k a_k x[n-k], zero initial state.
std::vector<double> InverseFilter(std::span<const double> coeffs,
                                  std::span<const double> x);
/// y[n] = e[n] + sum_k a_k y[n-k], zero initial state.
std::vector<double> SynthesisFilter(std::span<const double> coeffs,
                                    std::span<const double> excitation);

/// Roots of z^p - a_1 z^{p-1} - ... - a_p.
std::vector<std::complex<double>> LpcPoles(std::span<const double> coeffs);
/// Inverse of LpcPoles; imaginary residue from rounding is dropped.
std::vector<double> CoeffsFromPoles(
    std::span<const std::complex<double>> poles);

/// Phase phi in (0, pi) maps to min(phi^alpha, pi), negative phases
/// mirror, real poles keep their angle.  Magnitudes are kept, then clamped
/// to kMaxPoleMagnitude.
std::vector<std::complex<double>> WarpPoles(
    std::span<const std::complex<double>> poles, double alpha);

struct ShiftStats {
  size_t frames = 0;
  size_t voiced_frames = 0;  // frames with non-zero energy
  /// Largest pole magnitude of any rebuilt synthesis filter, measured by
  /// re-rooting the rebuilt coefficients.
  double max_pole_magnitude = 0.0;
};

/// Same length and sample rate as the input.  Deterministic.
WaveBuffer AnonymizeWav(const WaveBuffer &wave, const ShiftConfig &cfg,
                        ShiftStats *stats = nullptr);

/// RIFF/WAVE, PCM 16-bit, mono.
WaveBuffer ReadWav(const std::string &path);
void WriteWav(const WaveBuffer &wave, const std::string &path);

}  // namespace vprivacy

#endif  // VPRIVACY_FORMANT_SHIFT_H_
