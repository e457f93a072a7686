#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "njee/io.hpp"

namespace njee {

std::string library_version() { return "0.3.0"; }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{
        {"command_line", command_line},
        {"config", config},
        {"seed", seed},
        {"start_time", start_time},
        {"end_time", end_time},
        {"version", version},
        {"output", {{"file", output_file}, {"sha256", output_sha256}}},
    };
}

void write_with_manifest(const std::filesystem::path& csv_path, const CsvWriter& csv, RunManifest manifest) {
    csv.save(csv_path);
    manifest.output_file = csv_path.filename().string();
    manifest.output_sha256 = sha256_file(csv_path);
    if (manifest.version.empty()) manifest.version = library_version();
    if (manifest.end_time.empty()) manifest.end_time = utc_timestamp();
    std::ofstream out(csv_path.string() + ".manifest.json", std::ios::binary);
    if (!out) throw DataError("cannot write manifest for " + csv_path.string());
    out << manifest.to_json().dump(2) << '\n';
}

}  // namespace njee
