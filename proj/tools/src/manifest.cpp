#include "manifest.hpp"

#include <lppi/csv.hpp>
#include <lppi/error.hpp>

#include <openssl/evp.h>

#include <array>
#include <cstdio>

namespace lppi::cli {

std::string sha256_hex(const std::string& bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string file_sha256(const std::string& path) { return sha256_hex(csv::read_file(path)); }

Manifest::Manifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), run_start_(std::chrono::steady_clock::now())
{
}

void Manifest::input(const std::string& role, const std::string& path)
{
    inputs_[role] = {{"path", path}, {"sha256", file_sha256(path)}};
}

void Manifest::close_phase()
{
    if (current_.empty()) return;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - started_;
    timings_.push_back({{"phase", current_}, {"seconds", dt.count()}});
    current_.clear();
}

void Manifest::phase(const std::string& name)
{
    close_phase();
    current_ = name;
    started_ = std::chrono::steady_clock::now();
}

void Manifest::write(const std::string& outdir)
{
    close_phase();
    const std::chrono::duration<double> total = std::chrono::steady_clock::now() - run_start_;
    nlohmann::json j;
    j["subcommand"] = subcommand_;
    j["version"] = LPPI_VERSION;
    j["seed"] = seed_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["results"] = results_;
    j["timings"] = {{"phases", timings_}, {"total_seconds", total.count()}};
    csv::write_file_atomic(outdir + "/manifest.json", j.dump(2) + "\n");
}

} // namespace lppi::cli
