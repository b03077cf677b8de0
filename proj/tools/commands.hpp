#pragma once

#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace ned::cli {

enum Exit { Ok = 0, ValidationFailure = 2, NumericFailure = 3, Usage = 64 };

struct Shared {
    std::uint64_t seed = 0;
    int threads = 0;
};

// Adds every subcommand; the chosen one stores its runner in `action`.
void register_commands(CLI::App& app, Shared& shared, std::function<int()>& action);

// start:stop:step with inclusive endpoints (within 1e-12).
std::vector<double> parse_range(const std::string& spec);

}  // namespace ned::cli
