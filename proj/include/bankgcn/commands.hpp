#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bankgcn/config.hpp"

namespace bankgcn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitCheckFailed = 3;

/// Flags shared by every command.
struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;  ///< `--set key=value`, in order
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

/// Config file, then `--set` overrides, then `--out`; `seed_key` receives `--seed`.
RunConfig resolve_config(const CommonOptions& options, const std::string& seed_key = "train.seed");

/// Worker cap from BANKGCN_THREADS (default 1).
unsigned thread_cap();

int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
    std::filesystem::path checkpoint;
    std::string split = "all";  ///< all | train | val | test
    int run = 0;                ///< selects the split seed train.seed + run
};
int cmd_eval(const CommonOptions& options, const EvalOptions& eval, std::ostream& out, std::ostream& err);

struct ExportOptions {
    std::filesystem::path checkpoint;
    int layer = 0;
    int points = 201;
};
int cmd_export_response(const CommonOptions& options, const ExportOptions& exp, std::ostream& out,
                        std::ostream& err);

int cmd_check(const CommonOptions& options, bool inject_fault, std::ostream& out, std::ostream& err);
int cmd_gen_synthetic(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_inspect_dataset(const CommonOptions& options, std::ostream& out, std::ostream& err);

}  // namespace bankgcn
