#include "texfuse/experiment.hpp"

#include "texfuse/error.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace texfuse {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'T', 'X', 'F', 'F', 'E', 'A', 'T', '1'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

std::string unique_suffix() {
    static std::atomic<unsigned> counter{0};
    std::ostringstream s;
    s << ".tmp" << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '_' << counter++;
    return s.str();
}

}  // namespace

FeatureCache::FeatureCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw Error("cannot create cache directory '" + dir_.string() + "'");
}

fs::path FeatureCache::codebook_path(const std::string& key) const { return dir_ / (key + ".codebook"); }

std::optional<Matrix> FeatureCache::load_features(const std::string& key, std::span<const std::string> paths) const {
    std::ifstream in(dir_ / (key + ".feat"), std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
    std::uint64_t rows = 0, cols = 0;
    if (!get(in, rows) || !get(in, cols) || rows != paths.size()) return std::nullopt;
    for (const auto& p : paths) {
        std::uint64_t len = 0;
        if (!get(in, len) || len != p.size()) return std::nullopt;
        std::string stored(len, '\0');
        if (!in.read(stored.data(), static_cast<std::streamsize>(len)) || stored != p) return std::nullopt;
    }
    Matrix m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)))) {
        return std::nullopt;
    }
    ++hits_;
    return m;
}

void FeatureCache::store_features(const std::string& key, std::span<const std::string> paths,
                                  const Matrix& features) const {
    if (features.rows != paths.size()) throw ContractError("feature rows do not match the path list");
    const fs::path final_path = dir_ / (key + ".feat");
    const fs::path tmp = final_path.string() + unique_suffix();
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write cache file '" + tmp.string() + "'");
        out.write(kMagic, 8);
        put<std::uint64_t>(out, features.rows);
        put<std::uint64_t>(out, features.cols);
        for (const auto& p : paths) {
            put<std::uint64_t>(out, p.size());
            out.write(p.data(), static_cast<std::streamsize>(p.size()));
        }
        out.write(reinterpret_cast<const char*>(features.data.data()),
                  static_cast<std::streamsize>(features.data.size() * sizeof(double)));
        if (!out) throw Error("failed writing cache file '" + tmp.string() + "'");
    }
    fs::rename(tmp, final_path);
}

}  // namespace texfuse
