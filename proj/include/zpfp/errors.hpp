// Copyright 2026 the zpfp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace zpfp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Could not open or read a file.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input text (word-vector files, corpora, query sets).
/// Carries the 1-based line number when one applies, 0 otherwise.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0) : Error(msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// An argument violates a documented precondition or invariant.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Matrix/vector shapes do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Lookup of a word that is not in the vector table.
class WordNotFoundError : public Error {
public:
    using Error::Error;
};

/// A base query has no word eligible for substitution.
class PerturbError : public Error {
public:
    using Error::Error;
};

/// Every base query was dropped as degenerate; nothing left to aggregate.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// The planned number of model calls would exceed the query budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Base class for errors talking to a chat or embedding endpoint.
class WireError : public Error {
public:
    using Error::Error;
};

/// No response after the retry schedule was exhausted.
class TransportError : public WireError {
public:
    using WireError::WireError;
};

/// The endpoint answered with a non-2xx status.
class HttpStatusError : public WireError {
public:
    HttpStatusError(const std::string& msg, int status) : WireError(msg), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// 2xx response whose body does not follow the wire contract.
class MalformedResponseError : public WireError {
public:
    using WireError::WireError;
};

/// The endpoint returned an embedding of the wrong length.
class EmbeddingDimError : public WireError {
public:
    using WireError::WireError;
};

/// Base class for fingerprint-file deserialization failures.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class BadVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Two fingerprints cannot be compared (different embedders or shapes).
class ComparabilityError : public Error {
public:
    using Error::Error;
};

/// A statistic is undefined because an input sample has zero variance.
class ZeroVarianceError : public Error {
public:
    using Error::Error;
};

/// A theory-verification hypothesis is violated (c2 = 0, non-monotonic
/// activation, non-finite log-density).
class TheoryError : public Error {
public:
    using Error::Error;
};

}  // namespace zpfp
