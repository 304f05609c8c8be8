// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fieldray {

// All recoverable failures surface as Error; `type` is a stable machine
// readable tag, `what()` the human readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string type, const std::string& message)
      : std::runtime_error(message), type_(std::move(type)) {}

  const std::string& type() const { return type_; }

 private:
  std::string type_;
};

[[noreturn]] inline void fail(const std::string& type, const std::string& message) {
  throw Error(type, message);
}

}  // namespace fieldray
