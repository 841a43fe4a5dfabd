#include "xad/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xad/errors.hpp"
#include "xad/numerics.hpp"

namespace xad {

void RunManifest::add_input(const std::string& path) {
    input_hashes.emplace_back(path, file_hash_hex(path));
}

void RunManifest::add_artifact(const std::string& name, const std::string& path) {
    artifacts.emplace_back(name, path);
}

void RunManifest::add_extra(const std::string& key, const std::string& value) {
    extra.emplace_back(key, value);
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [path, hash] : input_hashes) j["inputs"][path] = hash;
    j["timings_ms"] = nlohmann::ordered_json::object();
    for (const auto& [stage, ms] : timings_ms) j["timings_ms"][stage] = ms;
    j["artifacts"] = nlohmann::ordered_json::object();
    for (const auto& [name, path] : artifacts) j["artifacts"][name] = path;
    j["extra"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : extra) j["extra"][key] = value;
    return j.dump(2);
}

void RunManifest::write_atomic(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write manifest: " + tmp);
        out << to_json() << '\n';
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot finalize manifest: " + path);
}

StageTimer::StageTimer(RunManifest& manifest, std::string stage)
    : manifest_(manifest), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

StageTimer::~StageTimer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_.timings_ms.emplace_back(
        stage_,
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count());
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return hash_hex(fnv1a64(ss.str()));
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace xad
