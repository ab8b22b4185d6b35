#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fixture {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = std::filesystem::temp_directory_path() / ("bankgcn-" + tag + "-" + std::to_string(rng() % 1000000007));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

/// Two graphs: a path on nodes 1-2 (class 1) and a triangle on nodes 3-5 (class 2).
/// Edges list both directions, as TU files do.
inline void write_tiny(const std::filesystem::path& dir, const std::string& name = "TINY") {
    write(dir / (name + "_A.txt"), "1, 2\n2, 1\n3, 4\n4, 3\n4, 5\n5, 4\n3, 5\n5, 3\n");
    write(dir / (name + "_graph_indicator.txt"), "1\n1\n2\n2\n2\n");
    write(dir / (name + "_graph_labels.txt"), "1\n2\n");
    write(dir / (name + "_node_labels.txt"), "0\n1\n1\n0\n1\n");
}

}  // namespace fixture
