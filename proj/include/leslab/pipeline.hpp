#pragma once

#include "leslab/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

/// End-to-end commands. Each returns a process exit code: 0 success,
/// 2 instability (non-finite state or loss), 3 validation error.
namespace leslab::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInstability = 2;
inline constexpr int kExitValidation = 3;

/// Output layout below out_dir.
struct Layout {
    std::filesystem::path root;

    std::filesystem::path dns() const { return root / "dns"; }
    std::filesystem::path pairs() const { return root / "pairs"; }
    std::filesystem::path models() const { return root / "models"; }
    std::filesystem::path eval() const { return root / "eval"; }
    std::filesystem::path snapshot(int i) const;
    std::filesystem::path pair(int i) const;
    std::filesystem::path model(closures::Variant v) const;
};

/// Exclusive claim on an output directory via an O_EXCL lockfile.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path file_;
};

/// Keeps large field buffers on the heap between calls instead of returning
/// them to the system; avoids refaulting pages every time step. glibc only.
void retain_heap_buffers();

int cmd_dns(const config::RunConfig& cfg, std::ostream& log);
int cmd_filter(const config::RunConfig& cfg, std::ostream& log);
/// Trains cfg.model (or writes the fixed model file for classical ones).
int cmd_train(const config::RunConfig& cfg, std::ostream& log);
/// Evaluates every available model, or only `only` when given.
int cmd_evaluate(const config::RunConfig& cfg, std::optional<closures::Variant> only, std::ostream& log);
/// Fast invariant suite; prints one line per check.
int cmd_selftest(std::ostream& log);

}  // namespace leslab::pipeline
