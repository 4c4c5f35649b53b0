/*
Copyright 2026 The kernsched Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace kernsched {

/// Failure categories. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
    usage = 2,
    format = 3,
    provider = 4,
    invariant = 5,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Bad arguments or configuration values.
class UsageError : public Error {
  public:
    explicit UsageError(const std::string &what) : Error(ErrorKind::usage, what) {}
};

/// Malformed input documents: graph files, expressions, libraries, configs.
class FormatError : public Error {
  public:
    explicit FormatError(const std::string &what) : Error(ErrorKind::format, what) {}
};

class ProviderError : public Error {
  public:
    explicit ProviderError(const std::string &what) : Error(ErrorKind::provider, what) {}
};

/// An internal consistency check failed.
class InvariantError : public Error {
  public:
    explicit InvariantError(const std::string &what) : Error(ErrorKind::invariant, what) {}
};

} // namespace kernsched
