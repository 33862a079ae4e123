// Copyright 2026 The annolex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace annolex {

/// Domain error raised by any module. `module()` names the owning module and
/// `name()` the error kind (e.g. "sampling" / "CellUnderflow"); the CLI prints
/// both on a single stderr line.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string name, const std::string& message)
      : std::runtime_error(message),
        module_(std::move(module)),
        name_(std::move(name)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& name() const noexcept { return name_; }

  /// "module.Name: message"
  std::string describe() const { return module_ + "." + name_ + ": " + what(); }

 private:
  std::string module_;
  std::string name_;
};

}  // namespace annolex
