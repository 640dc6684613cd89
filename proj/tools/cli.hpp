// Copyright 2026 The qsdc-sim Authors
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

// Command-line front end: `qsdc <consensus|ac|dc|eve|rate> [flags]`.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qsdc::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

struct Environment {
  std::optional<std::string> out_dir;  // QSDC_OUT_DIR; wins over --out
};

Environment environment_from_process();

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const Environment& env = {});

}  // namespace qsdc::cli
