// vprivacy/binary_io.h

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

// Little-endian helpers shared by the binary file formats.

#ifndef VPRIVACY_BINARY_IO_H_
#define VPRIVACY_BINARY_IO_H_

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "vprivacy/common.h"

namespace vprivacy::internal {

template <typename T>
void PutLe(std::ostream &os, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); i++)
    bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(bytes, sizeof(T));
}

inline void PutDouble(std::ostream &os, double d) {
  PutLe<uint64_t>(os, std::bit_cast<uint64_t>(d));
}

template <typename T>
T GetLe(std::istream &is, const char *what) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T)))
    throw ParseError(std::string("truncated binary file reading ") + what, 0);
  std::make_unsigned_t<T> u = 0;
  for (size_t i = 0; i < sizeof(T); i++)
    u |= static_cast<std::make_unsigned_t<T>>(bytes[i]) << (8 * i);
  return static_cast<T>(u);
}

inline double GetDouble(std::istream &is, const char *what) {
  return std::bit_cast<double>(GetLe<uint64_t>(is, what));
}

inline std::ifstream OpenForRead(const std::string &path, bool binary) {
  std::ifstream is(path, binary ? std::ios::in | std::ios::binary
                                : std::ios::in);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return is;
}

inline std::ofstream OpenForWrite(const std::string &path, bool binary) {
  std::ofstream os(path, binary ? std::ios::out | std::ios::binary |
                                      std::ios::trunc
                                : std::ios::out | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline void FinishWrite(std::ofstream &os, const std::string &path) {
  os.flush();
  if (!os) throw Error("write failed for '" + path + "'");
}

}  // namespace vprivacy::internal

#endif  // VPRIVACY_BINARY_IO_H_
