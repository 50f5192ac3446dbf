// Copyright 2026 The fedsparse Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedsparse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or shape mismatch between a spec, a parameter vector and a batch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed FSU1 byte stream. offset() is the byte position where decoding failed.
class CodecError : public Error {
 public:
  CodecError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// A client produced a non-finite parameter during local training.
class DivergenceError : public Error {
 public:
  DivergenceError(unsigned client_id, std::size_t epoch, std::size_t batch)
      : Error("client " + std::to_string(client_id) + " diverged at epoch " +
              std::to_string(epoch) + ", batch " + std::to_string(batch) +
              ": non-finite parameter"),
        client_id_(client_id),
        batch_(batch) {}
  unsigned client_id() const noexcept { return client_id_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  unsigned client_id_;
  std::size_t batch_;
};

}  // namespace fedsparse
