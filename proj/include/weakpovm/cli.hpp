// Copyright 2026 The weakpovm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "weakpovm/error.hpp"
#include "weakpovm/io.hpp"

namespace weakpovm {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitStatistical = 2,
    kExitNumerical = 3,
};

int exit_code_for(ErrorKind kind);

struct RunConfig {
    std::string command;
    std::string povm_path;
    std::optional<StateSpec> state;
    WalkConfig walk;
    std::int64_t trajectories = 20000;
    std::uint64_t seed = 0;
    int depth = 8;
    int threads = 0;        ///< 0 reads WEAKPOVM_THREADS
    double z_threshold = 3.0;
    std::string out_dir;    ///< empty: no files written
    bool write_csv = true;  ///< simulate: per-trajectory CSV
    bool include_strings = false;  ///< oracle: per-string entries in the JSON
    bool timing = false;    ///< add wall-clock timing (breaks byte-identity)

    /// Throws Error(validation) for out-of-range fields.
    void validate() const;
};

Json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const Json& j);

struct CommandResult {
    Json bundle;          ///< config echo, results, "invariants" list
    std::string summary;  ///< human-readable table
    std::string csv;      ///< simulate: per-trajectory rows; oracle: TV by depth
    int exit_code = kExitOk;
};

CommandResult cmd_validate(const RunConfig& cfg, const Povm& povm);
CommandResult cmd_decompose(const RunConfig& cfg, const Povm& povm);
CommandResult cmd_simulate(const RunConfig& cfg, const Povm& povm);
CommandResult cmd_oracle(const RunConfig& cfg, const Povm& povm);

/// Loads the POVM file, dispatches on cfg.command, and writes the bundle (and
/// CSV) to cfg.out_dir when set.
CommandResult run_command(const RunConfig& cfg);

/// Entry point of the `weakpovm` executable.
int run_cli(int argc, char** argv);

}  // namespace weakpovm
