// vprivacy/common.h

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

#ifndef VPRIVACY_COMMON_H_
#define VPRIVACY_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vprivacy {

/// Base class for every error raised by the library.  The CLI maps these to
/// exit code 2 (data / validation error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; line() is 1-based, or 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, size_t line);
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

using WarningHandler = std::function<void(const std::string &)>;

/// Installs a handler for non-fatal diagnostics and returns the previous one.
/// The default handler writes "WARNING: <msg>" to stderr.
WarningHandler SetWarningHandler(WarningHandler handler);
void Warn(const std::string &message);

/// Platform-stable pseudo-random stream.  The engine is std::mt19937_64, whose
/// output sequence is fixed by the standard; the distributions below are
/// implemented here because the std:: ones are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  /// Stream derived from (seed, tag, id).  Distinct keys give independent
  /// streams; the derivation does not depend on std::hash.
  static RandomStream Keyed(uint64_t seed, std::string_view tag,
                            std::string_view id);

  uint64_t NextU64() { return engine_(); }
  /// Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  /// Uniform integer in [0, n); n must be positive.
  uint64_t Below(uint64_t n);
  double Normal();
  /// k distinct indices from [0, n) drawn uniformly, in draw order.
  std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k);
  template <typename T>
  void Shuffle(std::vector<T> *v) {
    for (size_t i = v->size(); i > 1; i--)
      std::swap((*v)[i - 1], (*v)[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Runs body(i) for i in [0, n) on up to `jobs` threads.  Each index must
/// write only to its own output slot.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &body);

/// Plain decimal rendering (never exponent notation) rounded to `digits`
/// significant digits, trailing zeros trimmed: 0.5 -> "0.5".
std::string FormatDecimal(double value, int digits = 9);
/// Fixed notation with `decimals` places, "%.<decimals>f".
std::string FormatFixed(double value, int decimals);

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> SplitWhitespace(std::string_view line);
/// Strict double parse of a whole token; throws ParseError on failure.
double ParseDouble(std::string_view token, size_t line);

}  // namespace vprivacy

#endif  // VPRIVACY_COMMON_H_
