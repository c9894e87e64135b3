// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace risce {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class SolverDiverged : public Error {
public:
  SolverDiverged(const std::string &what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

class DegenerateAngles : public Error {
public:
  using Error::Error;
};

class InvalidSubarrayConfig : public Error {
public:
  using Error::Error;
};

class InsufficientPeaks : public Error {
public:
  InsufficientPeaks(const std::string &what, int path)
      : Error(what + " (path " + std::to_string(path) + ")"), path_(path) {}
  int path() const noexcept { return path_; }

private:
  int path_;
};

class UnderdeterminedConfig : public Error {
public:
  using Error::Error;
};

class UndefinedMetric : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace risce
