#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>

#include "intragen/conditions.hpp"
#include "intragen/image.hpp"
#include "intragen/manifest.hpp"

namespace intragen::cli {

// worker cap: INTRAGEN_THREADS when set, else machine parallelism
int worker_threads();

// run fn(0..n-1) across worker threads; fn must write only to its own slot
void parallel_for(int n, const std::function<void(int)>& fn);

std::string frame_filename(const std::string& prefix, int index);  // prefix_%05d.ppm

void add_output(RunManifest& m, const std::filesystem::path& base_dir,
                const std::filesystem::path& file);
void add_input(RunManifest& m, const std::filesystem::path& base_dir,
               const std::filesystem::path& file);

void write_frame_stack(const FrameStack& frames, const std::filesystem::path& dir,
                       const std::string& prefix);
FrameStack read_frame_stack(const std::filesystem::path& dir, const std::string& prefix,
                            int count);
void write_condition_stack(const ConditionStack& stack, const std::filesystem::path& dir,
                           const std::string& prefix);

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace intragen::cli
