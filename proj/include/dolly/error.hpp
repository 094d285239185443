/*
Copyright 2026 The Dolly Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace dolly {

// Error classes map 1:1 onto CLI exit codes.
enum class Errc {
  invalid_input = 2,
  degenerate_geometry = 3,
  io_error = 4,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
  throw Error(Errc::invalid_input, msg);
}
[[noreturn]] inline void fail_geometry(const std::string& msg) {
  throw Error(Errc::degenerate_geometry, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(Errc::io_error, msg);
}

}  // namespace dolly
