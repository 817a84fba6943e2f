/*
 * Copyright 2026 The scusim Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace scusim {

enum class ErrorCode {
  Config,
  InvalidArgument,
  AddressFault,
  DecodeFault,
  IllegalInstr,
  UnlockNotOwner,
  UnsupportedTeam,
  NotReached,
  MalformedTrace,
  Deadlock,
  Parse,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure inside the library surfaces as an Error; the C API maps the
// code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AddressFault: return "AddressFault";
    case ErrorCode::DecodeFault: return "DecodeFault";
    case ErrorCode::IllegalInstr: return "IllegalInstr";
    case ErrorCode::UnlockNotOwner: return "UnlockNotOwner";
    case ErrorCode::UnsupportedTeam: return "UnsupportedTeam";
    case ErrorCode::NotReached: return "NotReached";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

}  // namespace scusim
