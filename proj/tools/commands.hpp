#pragma once

#include <CLI11.hpp>

namespace intragen::cli {

// Each registers one subcommand on the root app; callbacks throw on domain
// errors and main maps exceptions to exit codes.
void register_simulate(CLI::App& app);
void register_encode(CLI::App& app);
void register_train(CLI::App& app);
void register_sample(CLI::App& app);
void register_evaluate(CLI::App& app);
void register_pipeline(CLI::App& app);
void register_verify(CLI::App& app);

}  // namespace intragen::cli
