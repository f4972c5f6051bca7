/*
 * Copyright 2026 The LegalLens Pipeline Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace legallens {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied data files or inputs. The CLI maps these to
// exit code 2; everything else that is not a usage error maps to 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage or out-of-range configuration values (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

#define LEGALLENS_DEFINE_ERROR(Name, Base) \
  class Name : public Base {               \
   public:                                 \
    using Base::Base;                      \
  }

// corpus
class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit MalformedRecord(const std::string& what) : DataError(what) {}

  // 1-based line number within the source file, 0 when unknown.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};
LEGALLENS_DEFINE_ERROR(InvalidBio, DataError);
LEGALLENS_DEFINE_ERROR(OverlapError, DataError);
LEGALLENS_DEFINE_ERROR(EmptyDataset, DataError);

// span_ner
LEGALLENS_DEFINE_ERROR(VariantMismatch, Error);
LEGALLENS_DEFINE_ERROR(CheckpointMismatch, DataError);

// nli
LEGALLENS_DEFINE_ERROR(EmptyInput, DataError);
LEGALLENS_DEFINE_ERROR(MissingDomain, DataError);
LEGALLENS_DEFINE_ERROR(WrongModelCount, DataError);
LEGALLENS_DEFINE_ERROR(LengthMismatch, DataError);

// augment
LEGALLENS_DEFINE_ERROR(ClientError, Error);
// A failure worth retrying (timeouts, connection resets, 429 and 5xx).
LEGALLENS_DEFINE_ERROR(TransientClientError, ClientError);
// ClientError raised while augmenting one record of a batch.
class RecordClientError : public ClientError {
 public:
  RecordClientError(std::size_t index, const std::string& what)
      : ClientError("record " + std::to_string(index) + ": " + what),
        index_(index) {}

  // 0-based position of the failing record in the input.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};
LEGALLENS_DEFINE_ERROR(EmptyGeneration, Error);
LEGALLENS_DEFINE_ERROR(GenerationInvalid, Error);
LEGALLENS_DEFINE_ERROR(PoolTooSmall, DataError);
LEGALLENS_DEFINE_ERROR(UnboundPlaceholder, Error);

// trainer
LEGALLENS_DEFINE_ERROR(EmptyData, DataError);
LEGALLENS_DEFINE_ERROR(NonFiniteLoss, Error);
LEGALLENS_DEFINE_ERROR(UnclassifiedParameter, Error);
LEGALLENS_DEFINE_ERROR(LeakageError, Error);

// metrics
LEGALLENS_DEFINE_ERROR(IdMismatch, DataError);

#undef LEGALLENS_DEFINE_ERROR

}  // namespace legallens
