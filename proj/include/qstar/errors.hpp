// Copyright 2026 The qstar Authors.
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

#ifndef QSTAR_ERRORS_HPP_
#define QSTAR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace qstar {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid construction parameters (eta range, d, feasibility bounds, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A planner issued a malformed query (bad action index, unknown state).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A policy was undefined or malformed at a state it was asked about.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// State enumeration exceeded the configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling of a vector family ran out of retries.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, double worst_overlap)
      : Error(what), worst_overlap_(worst_overlap) {}
  double worst_overlap() const { return worst_overlap_; }

 private:
  double worst_overlap_;
};

// Experimental design did not reach the leverage target.
class DesignError : public Error {
 public:
  DesignError(const std::string& what, double max_leverage)
      : Error(what), max_leverage_(max_leverage) {}
  double max_leverage() const { return max_leverage_; }

 private:
  double max_leverage_;
};

// Harness query budget exhausted.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid experiment configuration; carries the offending line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace qstar

#endif  // QSTAR_ERRORS_HPP_
