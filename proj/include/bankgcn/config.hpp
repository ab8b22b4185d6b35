#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bankgcn/dataset.hpp"
#include "bankgcn/model.hpp"
#include "bankgcn/training.hpp"

namespace bankgcn {

/// Flat dotted-key document, e.g. `train.learning_rate = 0.001`. Later entries win.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError naming the line.
KeyValues parse_key_values(const std::string& text, const std::string& origin);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies one `key=value` override.
void apply_override(KeyValues& kv, const std::string& assignment);

struct DatasetConfig {
    enum class Source { Tu, Synthetic };
    Source source = Source::Synthetic;

    std::filesystem::path tu_dir;
    std::string tu_name;
    bool normalize = false;

    std::size_t synthetic_graphs = 500;
    Index synthetic_nodes = 16;
    std::uint64_t synthetic_seed = 0;
    SyntheticOptions synthetic;

    std::array<double, 3> split{0.8, 0.1, 0.1};
};

struct ModelConfig {
    std::vector<Index> widths{64, 64, 64, 64};
    int subspaces = 8;
    int order = 2;
    /// Single fixed (1, -1, 0, ...) filter per layer instead of a learned bank.
    bool frozen_lowpass = false;
};

struct RunConfig {
    DatasetConfig dataset;
    ModelConfig model;
    TrainConfig train;
    std::filesystem::path out_dir = "bankgcn-out";
    int runs = 1;
};

/// Every key the loader understands, with its default rendered as text.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Builds and validates a RunConfig. Unknown keys and malformed values raise ConfigError.
RunConfig load_run_config(const KeyValues& kv);

void validate(const RunConfig& config);

/// Canonical `key = value` rendering (sorted keys), stored next to run outputs.
std::string render_run_config(const RunConfig& config);

Dataset load_dataset(const DatasetConfig& config);

}  // namespace bankgcn
