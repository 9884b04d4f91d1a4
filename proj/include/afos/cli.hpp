#pragma once

// Command-line front end. run_cli() is the whole program minus main() so
// tests can drive it in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "afos/evolver.hpp"
#include "afos/tinynet.hpp"

namespace afos::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct RunConfig {
    std::string preset = "desk";
    evolver::GAConfig ga;
    tinynet::TrainConfig train;
    std::string evaluator = "train";  // train | surrogate
    std::string network = "desk";     // desk | phi
    int hidden = 32;

    std::string dataset = "synth";  // synth | idx | cifar10
    int synth_classes = 4;
    std::size_t synth_per_class = 100;
    std::size_t synth_dims = 2;
    double synth_separation = 8.0;
    std::string idx_images, idx_labels, idx_test_images, idx_test_labels;
    std::string cifar_batches;  // comma-separated
    std::string cifar_test;
    std::size_t val_count = 80;
    std::size_t test_count = 80;  // synth only
    std::uint64_t data_seed = 0;

    int workers = 1;
    std::string out = "afos-run";
};

RunConfig preset(const std::string& name);

// Sets one key; throws ConfigError for unknown keys or malformed values.
void apply(RunConfig& cfg, const std::string& key, const std::string& value);

struct ConfigEntry {
    int line;
    std::string key, value;
};

// Flat key=value file; '#' starts a comment. Errors carry the line number.
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

// Preset named in the file (or "desk"), then the file's keys in order.
RunConfig load_config(const std::filesystem::path& path, const std::string& preset_override = {});

std::map<std::string, std::string> to_map(const RunConfig& cfg);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace afos::cli
