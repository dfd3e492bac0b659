// Copyright 2026 The ICPC Authors.
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

#include <string>

#ifndef ICPC_VERSION_STRING
#define ICPC_VERSION_STRING "0.0.0-unknown"
#endif

namespace icpc {

// Release version, with the git description appended when built from a
// checkout (for example "0.1.0+g2f2b47c-dirty").
[[nodiscard]] inline std::string version_string() { return ICPC_VERSION_STRING; }

}  // namespace icpc
