// Copyright 2026 The IterX-cpp Authors.
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

// Command-line front end: score, train, extract, sweep and synth.

#ifndef ITERX_CLI_H_
#define ITERX_CLI_H_

#include <iosfwd>

namespace iterx::cli {

// Environment variable naming the default ontology file.
inline constexpr const char *kOntologyEnv = "ITERX_ONTOLOGY";

// Returns the process exit code: 0 on success, 1 for input errors reported by
// the library, and the parser's code for argument errors.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace iterx::cli

#endif  // ITERX_CLI_H_
