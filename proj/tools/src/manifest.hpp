#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace lppi::cli {

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::string& path);

/// Run record written next to every set of outputs.
class Manifest
{
public:
    explicit Manifest(std::string subcommand);

    nlohmann::json& config() { return config_; }
    nlohmann::json& results() { return results_; }
    void seed(std::uint64_t s) { seed_ = s; }
    void input(const std::string& role, const std::string& path);
    void output(const std::string& name) { outputs_.push_back(name); }

    /// Starts timing `phase`; the previous phase (if any) ends.
    void phase(const std::string& name);

    /// Writes outdir/manifest.json atomically.
    void write(const std::string& outdir);

private:
    void close_phase();

    std::string subcommand_;
    std::uint64_t seed_ = 0;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json results_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::object();
    std::vector<std::string> outputs_;
    nlohmann::json timings_ = nlohmann::json::array();
    std::string current_;
    std::chrono::steady_clock::time_point started_{};
    std::chrono::steady_clock::time_point run_start_;
};

} // namespace lppi::cli
