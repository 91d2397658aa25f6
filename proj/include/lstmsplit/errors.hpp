/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LSTMSPLIT_ERRORS_HPP_
#define LSTMSPLIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lstmsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (bad flags, bad privacy budget, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based row number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, long row = -1) : Error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

/// Malformed frame or unexpected message on the wire.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Transport failure: peer closed, socket error, remote ERROR frame.
class SessionError : public Error {
 public:
  using Error::Error;
};

/// Weight relay failed its integrity check.
class HandoffError : public Error {
 public:
  using Error::Error;
};

}  // namespace lstmsplit

#endif  // LSTMSPLIT_ERRORS_HPP_
