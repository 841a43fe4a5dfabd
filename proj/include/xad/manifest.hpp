#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace xad {

// Per-run provenance record: tool version, config hash, input hashes, stage
// timings and artifact paths. Written atomically at the end of a run.
struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> input_hashes;     // path -> hex hash
    std::vector<std::pair<std::string, double>> timings_ms;            // stage -> duration
    std::vector<std::pair<std::string, std::string>> artifacts;        // name -> path
    std::vector<std::pair<std::string, std::string>> extra;            // free-form facts

    void add_input(const std::string& path);
    void add_artifact(const std::string& name, const std::string& path);
    void add_extra(const std::string& key, const std::string& value);

    std::string to_json() const;
    // Writes to a temp file in the same directory, then renames.
    void write_atomic(const std::string& path) const;
};

// Monotonic stage timer.
class StageTimer {
public:
    explicit StageTimer(RunManifest& manifest, std::string stage);
    ~StageTimer();
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    RunManifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

std::string file_hash_hex(const std::string& path);
std::string hash_hex(std::uint64_t h);

}  // namespace xad
