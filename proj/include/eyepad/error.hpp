// Copyright 2026 The eyepad Authors
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

#include <stdexcept>
#include <string>

namespace eyepad {

// Root of every error the library throws on a violated contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Attempt to mutate parameters of a frozen model or store.
class FrozenError : public Error {
 public:
  using Error::Error;
};

class MissingGradError : public Error {
 public:
  using Error::Error;
};

// Input data or arguments that violate an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A required input artifact (bundle, snapshot, config file) does not exist.
class MissingInputError : public IoError {
 public:
  using IoError::IoError;
};

// Artifacts that exist but cannot be used together.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace eyepad
