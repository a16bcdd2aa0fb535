#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tml {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_refusal = 3 };

struct RunResult {
    int exit_code = exit_ok;
    std::string config_hash;          // 16 hex digits of FNV-1a over the canonical config
    std::vector<std::string> files;   // written outputs
    std::string message;              // diagnostic for nonzero exit codes
};

const std::vector<std::string>& experiment_names();

// Runs one experiment described by a JSON config. Relative output paths are resolved against
// out_dir. Never throws: failures are mapped to exit codes.
RunResult run_experiment(const nlohmann::json& config, const std::string& out_dir, int threads = 0);
RunResult run_experiment_text(std::string_view config_text, const std::string& out_dir, int threads = 0);

// What an experiment computes and the layout of its outputs; nullopt for unknown names.
std::optional<std::string> describe_experiment(std::string_view name);

}  // namespace tml
