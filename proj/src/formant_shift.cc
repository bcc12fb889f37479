// vprivacy/formant_shift.cc

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

#include "vprivacy/formant_shift.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vprivacy/common.h"

namespace vprivacy {

ShiftConfig ShiftConfig::ForSampleRate(int sample_rate, double alpha) {
  if (sample_rate <= 0) throw Error("sample rate must be positive");
  ShiftConfig cfg;
  cfg.alpha = alpha;
  cfg.frame_len = std::max(4, static_cast<int>(std::lround(0.025 * sample_rate)));
  cfg.hop = std::max(1, static_cast<int>(std::lround(0.010 * sample_rate)));
  cfg.lpc_order = std::clamp(
      static_cast<int>(std::lround(20.0 * sample_rate / 16000.0)), 2,
      cfg.frame_len - 1);
  return cfg;
}

void ShiftConfig::Validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw Error("alpha must be in (0, 2]");
  if (lpc_order <= 0) throw Error("lpc_order must be positive");
  if (frame_len <= 0 || hop <= 0) throw Error("frame_len and hop must be positive");
  if (hop > frame_len) throw Error("hop must not exceed frame_len");
  if (lpc_order >= frame_len) throw Error("lpc_order must be below frame_len");
}

LpcFrame LpcAnalyze(std::span<const double> frame, int order) {
  const int n = static_cast<int>(frame.size());
  if (order <= 0 || order >= n)
    throw Error("LPC order must be in [1, frame length)");
  std::vector<double> r(order + 1, 0.0);
  for (int lag = 0; lag <= order; lag++)
    for (int i = lag; i < n; i++) r[lag] += frame[i] * frame[i - lag];

  LpcFrame out;
  out.coeffs.assign(order, 0.0);
  double err = r[0];
  std::vector<double> prev(order, 0.0);
  for (int i = 0; i < order; i++) {
    if (!(err > 1e-12 * r[0]) || err <= 0.0) break;
    double acc = r[i + 1];
    for (int j = 0; j < i; j++) acc -= out.coeffs[j] * r[i - j];
    double k = acc / err;
    prev = out.coeffs;
    out.coeffs[i] = k;
    for (int j = 0; j < i; j++) out.coeffs[j] = prev[j] - k * prev[i - 1 - j];
    err *= 1.0 - k * k;
  }
  out.excitation = InverseFilter(out.coeffs, frame);
  return out;
}

std::vector<double> InverseFilter(std::span<const double> coeffs,
                                  std::span<const double> x) {
  const size_t p = coeffs.size();
  std::vector<double> e(x.size());
  for (size_t n = 0; n < x.size(); n++) {
    double v = x[n];
    for (size_t k = 1; k <= p && k <= n; k++) v -= coeffs[k - 1] * x[n - k];
    e[n] = v;
  }
  return e;
}

std::vector<double> SynthesisFilter(std::span<const double> coeffs,
                                    std::span<const double> excitation) {
  const size_t p = coeffs.size();
  std::vector<double> y(excitation.size());
  for (size_t n = 0; n < excitation.size(); n++) {
    double v = excitation[n];
    for (size_t k = 1; k <= p && k <= n; k++) v += coeffs[k - 1] * y[n - k];
    y[n] = v;
  }
  return y;
}

std::vector<std::complex<double>> LpcPoles(std::span<const double> coeffs) {
  const int p = static_cast<int>(coeffs.size());
  if (p == 0) return {};
  // Companion matrix of z^p - a_1 z^{p-1} - ... - a_p.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < p; k++) companion(0, k) = coeffs[k];
  for (int k = 1; k < p; k++) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
  if (eig.info() != Eigen::Success) throw Error("LPC root finding failed");
  std::vector<std::complex<double>> poles(p);
  for (int k = 0; k < p; k++) poles[k] = eig.eigenvalues()(k);
  return poles;
}

std::vector<double> CoeffsFromPoles(
    std::span<const std::complex<double>> poles) {
  // prod (z - r_k) = z^p + c_1 z^{p-1} + ... + c_p, and a_k = -c_k.
  std::vector<std::complex<double>> poly{1.0};
  for (const auto &r : poles) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (size_t i = 0; i < poly.size(); i++) {
      next[i] += poly[i];
      next[i + 1] -= r * poly[i];
    }
    poly = std::move(next);
  }
  std::vector<double> coeffs(poles.size());
  for (size_t k = 0; k < poles.size(); k++) coeffs[k] = -poly[k + 1].real();
  return coeffs;
}

std::vector<std::complex<double>> WarpPoles(
    std::span<const std::complex<double>> poles, double alpha) {
  std::vector<std::complex<double>> out;
  out.reserve(poles.size());
  for (const auto &z : poles) {
    double mag = std::min(std::abs(z), kMaxPoleMagnitude);
    if (z.imag() == 0.0) {
      out.emplace_back(z.real() < 0 ? -mag : mag, 0.0);
      continue;
    }
    double phi = std::arg(z);
    if (std::abs(phi) < std::numbers::pi) {
      double warped = std::min(std::pow(std::abs(phi), alpha), std::numbers::pi);
      phi = phi > 0 ? warped : -warped;
    }
    out.push_back(std::polar(mag, phi));
  }
  return out;
}

namespace {

std::vector<double> HannWindow(int n) {
  // Offset by half a sample so no tap is exactly zero; every sample covered
  // by a frame then has positive window weight.
  std::vector<double> w(n);
  for (int i = 0; i < n; i++)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
  return w;
}

double Energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace

WaveBuffer AnonymizeWav(const WaveBuffer &wave, const ShiftConfig &cfg,
                        ShiftStats *stats) {
  if (wave.sample_rate <= 0) throw Error("sample rate must be positive");
  cfg.Validate();
  if (wave.samples.empty()) throw Error("empty waveform");
  for (double s : wave.samples)
    if (!std::isfinite(s)) throw Error("non-finite sample in waveform");

  const long n = static_cast<long>(wave.samples.size());
  const int len = cfg.frame_len;
  const std::vector<double> window = HannWindow(len);
  std::vector<double> out(n, 0.0), weight(n, 0.0);
  ShiftStats local;

  // The first frame starts early enough that sample 0 is covered by as many
  // frames as any interior sample.
  const long first_start = -static_cast<long>(len - cfg.hop);
  std::vector<double> frame(len);
  for (long start = first_start; start < n; start += cfg.hop) {
    local.frames++;
    for (int i = 0; i < len; i++) {
      long t = start + i;
      frame[i] = (t >= 0 && t < n) ? window[i] * wave.samples[t] : 0.0;
      if (t >= 0 && t < n) weight[t] += window[i];
    }
    const double in_energy = Energy(frame);
    if (in_energy == 0.0) continue;
    local.voiced_frames++;

    LpcFrame lpc = LpcAnalyze(frame, cfg.lpc_order);
    std::vector<double> shifted =
        CoeffsFromPoles(WarpPoles(LpcPoles(lpc.coeffs), cfg.alpha));
    for (const auto &z : LpcPoles(shifted))
      local.max_pole_magnitude = std::max(local.max_pole_magnitude, std::abs(z));
    std::vector<double> y = SynthesisFilter(shifted, lpc.excitation);

    const double out_energy = Energy(y);
    const double gain = out_energy > 0 ? std::sqrt(in_energy / out_energy) : 0.0;
    for (int i = 0; i < len; i++) {
      long t = start + i;
      if (t >= 0 && t < n) out[t] += gain * y[i];
    }
  }
  for (long t = 0; t < n; t++)
    if (weight[t] > 0) out[t] /= weight[t];

  if (stats != nullptr) *stats = local;
  return {std::move(out), wave.sample_rate};
}

}  // namespace vprivacy
