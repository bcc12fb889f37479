// vprivacy/common.cc

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

#include "vprivacy/common.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace vprivacy {

ParseError::ParseError(const std::string &what, size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

namespace {

std::mutex warning_mutex;

WarningHandler &CurrentHandler() {
  static WarningHandler handler = [](const std::string &msg) {
    std::cerr << "WARNING: " << msg << '\n';
  };
  return handler;
}

// 64-bit FNV-1a, then the splitmix64 finalizer for avalanche.
uint64_t HashBytes(uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t Mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

WarningHandler SetWarningHandler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  WarningHandler previous = std::move(CurrentHandler());
  CurrentHandler() = std::move(handler);
  return previous;
}

void Warn(const std::string &message) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  if (CurrentHandler()) CurrentHandler()(message);
}

RandomStream RandomStream::Keyed(uint64_t seed, std::string_view tag,
                                 std::string_view id) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; i++) {
    char byte = static_cast<char>((seed >> (8 * i)) & 0xff);
    h = HashBytes(h, std::string_view(&byte, 1));
  }
  // Length prefixes keep ("ab","c") and ("a","bc") apart.
  std::string tag_len = std::to_string(tag.size()) + ":";
  h = HashBytes(h, tag_len);
  h = HashBytes(h, tag);
  std::string id_len = std::to_string(id.size()) + ":";
  h = HashBytes(h, id_len);
  h = HashBytes(h, id);
  return RandomStream(Mix64(h));
}

double RandomStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t RandomStream::Below(uint64_t n) {
  if (n == 0) throw Error("RandomStream::Below: empty range");
  // Rejection sampling removes modulo bias.
  uint64_t limit = std::numeric_limits<uint64_t>::max() -
                   std::numeric_limits<uint64_t>::max() % n;
  uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double RandomStream::Normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  have_spare_normal_ = true;
  return u * factor;
}

std::vector<size_t> RandomStream::SampleWithoutReplacement(size_t n,
                                                           size_t k) {
  if (k > n) throw Error("cannot sample " + std::to_string(k) +
                         " items from " + std::to_string(n));
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  // Partial Fisher-Yates.
  for (size_t i = 0; i < k; i++) {
    size_t j = i + static_cast<size_t>(Below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &body) {
  size_t workers = static_cast<size_t>(std::max(1, jobs));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; i++) body(i);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (size_t w = 0; w < workers; w++) {
    threads.emplace_back([&, w]() {
      try {
        for (size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto &t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string FormatDecimal(double value, int digits) {
  if (!std::isfinite(value)) throw Error("cannot format non-finite value");
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, value);
  // buf looks like [-]d.dddde[+-]xx
  std::string s(buf);
  bool negative = s[0] == '-';
  if (negative) s.erase(0, 1);
  size_t e_pos = s.find('e');
  int exponent = std::stoi(s.substr(e_pos + 1));
  std::string mantissa;
  for (size_t i = 0; i < e_pos; i++)
    if (s[i] != '.') mantissa.push_back(s[i]);

  std::string int_part, frac_part;
  if (exponent >= 0) {
    size_t int_len = static_cast<size_t>(exponent) + 1;
    if (mantissa.size() < int_len) mantissa.append(int_len - mantissa.size(), '0');
    int_part = mantissa.substr(0, int_len);
    frac_part = mantissa.substr(int_len);
  } else {
    int_part = "0";
    frac_part = std::string(static_cast<size_t>(-exponent - 1), '0') + mantissa;
  }
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  std::string out = negative ? "-" : "";
  out += int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  return out;
}

std::string FormatFixed(double value, int decimals) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) i++;
    size_t start = i;
    while (i < line.size() && !is_space(line[i])) i++;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double ParseDouble(std::string_view token, size_t line) {
  double value = 0.0;
  const char *begin = token.data();
  const char *end = token.data() + token.size();
  if (!token.empty() && *begin == '+') begin++;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("invalid number '" + std::string(token) + "'", line);
  if (!std::isfinite(value))
    throw ParseError("non-finite number '" + std::string(token) + "'", line);
  return value;
}

}  // namespace vprivacy
