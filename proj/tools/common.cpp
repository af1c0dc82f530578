#include "common.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace intragen::cli {

int worker_threads() {
    if (const char* env = std::getenv("INTRAGEN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(n, worker_threads());
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string frame_filename(const std::string& prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_%05d.ppm", index);
    return prefix + buf;
}

namespace {

std::string relative_to(const std::filesystem::path& base, const std::filesystem::path& file) {
    std::error_code ec;
    const auto rel = std::filesystem::relative(file, base, ec);
    if (ec || rel.empty()) return file.string();
    return rel.string();
}

}  // namespace

void add_output(RunManifest& m, const std::filesystem::path& base_dir,
                const std::filesystem::path& file) {
    m.outputs[relative_to(base_dir, file)] = digest_hex(fnv1a64_file(file.string()));
}

void add_input(RunManifest& m, const std::filesystem::path& base_dir,
               const std::filesystem::path& file) {
    m.inputs[relative_to(base_dir, file)] = digest_hex(fnv1a64_file(file.string()));
}

void write_frame_stack(const FrameStack& frames, const std::filesystem::path& dir,
                       const std::string& prefix) {
    std::filesystem::create_directories(dir);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto path = dir / frame_filename(prefix, static_cast<int>(f));
        // atomic rename keeps partially written frames visible as .partial only
        const std::string tmp = path.string() + ".partial";
        write_ppm(frames[f], tmp);
        std::filesystem::rename(tmp, path);
    }
}

FrameStack read_frame_stack(const std::filesystem::path& dir, const std::string& prefix,
                            int count) {
    FrameStack frames;
    frames.reserve(static_cast<std::size_t>(count));
    for (int f = 0; f < count; ++f)
        frames.push_back(read_ppm((dir / frame_filename(prefix, f)).string()));
    return frames;
}

void write_condition_stack(const ConditionStack& stack, const std::filesystem::path& dir,
                           const std::string& prefix) {
    FrameStack frames;
    frames.reserve(stack.frames.size());
    for (const auto& f : stack.frames) frames.push_back(to_u8(f));
    write_frame_stack(frames, dir, prefix);
}

}  // namespace intragen::cli
