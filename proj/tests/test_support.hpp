#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "erkit/types.hpp"

namespace testsupport {

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / ("erkit_test_" + std::to_string(rd()) + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline erkit::EntityReference make_ref(const std::string& ref_id, const std::string& source_id,
                                       erkit::AttributeMap attributes) {
    erkit::EntityReference ref;
    ref.ref_id = ref_id;
    ref.source_id = source_id;
    ref.attributes = std::move(attributes);
    ref.provenance = {{source_id, 0}};
    return ref;
}

inline std::string random_ascii(std::mt19937& rng, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> ch('a', 'z');
    std::string out;
    std::size_t n = len(rng);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(ch(rng)));
    return out;
}

}  // namespace testsupport
