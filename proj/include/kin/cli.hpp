// Copyright 2026 The Kinetrace Authors
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

#include <iosfwd>
#include <string>
#include <vector>

namespace kin::cli {

inline constexpr const char* kToolName = "kinetrace";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

/// Runs one CLI invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes via a sibling temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace kin::cli
