// Copyright 2026 The evnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace evnav {

/// Base class for all evnav errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed scenario files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit failures (rank deficiency, too few samples).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced by a numeric routine. Carries the index of
/// the offending component (vector entry, step, ...) when known.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int index) : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

namespace log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Global verbosity, initialized from the EVNAV_LOG environment variable
/// (error|warn|info|debug). Defaults to warn.
Level verbosity();
bool enabled(Level level);
void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace log

/// Deterministic RNG with an explicit bit-to-double mapping so that streams
/// are reproducible independent of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (polar form avoided to keep the
  /// consumption pattern fixed).
  double normal();

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used for stateless, replay-stable jitter streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [-1, 1) derived from a hash value.
double hash_to_symmetric_unit(std::uint64_t h);

}  // namespace evnav
