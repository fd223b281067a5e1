#pragma once

#include <hcim/network.hpp>
#include <hcim/rng.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testutil {

/// Two mutually-following nodes, beta = 0.1, used throughout as the
/// worked 2-interior system: R = [[0, .9], [.9, 0]], bias column (.1, .1).
inline hcim::Network two_node_net() {
    hcim::Network net(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    net.set_beta_uniform(0.1);
    return net;
}

/// Hub-and-spoke: leaves 1..n-1 each follow node 0.
inline hcim::Network star_net(hcim::NodeIndex n, double beta = 0.1) {
    std::vector<hcim::Edge> edges;
    for (hcim::NodeIndex i = 1; i < n; ++i) edges.push_back({i, 0, 1.0});
    hcim::Network net(n, std::move(edges));
    net.set_beta_uniform(beta);
    return net;
}

/// Erdos-Renyi-style random digraph with U(0,1) weights normalized per row.
inline hcim::Network random_net(hcim::NodeIndex n, double p, std::uint64_t seed,
                                double beta = 0.1) {
    hcim::Philox4x64 gen(seed);
    std::vector<hcim::Edge> edges;
    for (hcim::NodeIndex i = 0; i < n; ++i)
        for (hcim::NodeIndex j = 0; j < n; ++j)
            if (i != j && hcim::uniform01(gen) < p) edges.push_back({i, j, hcim::uniform01(gen)});
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    for (const auto& e : edges) row[static_cast<std::size_t>(e.src)] += e.weight;
    for (auto& e : edges)
        if (row[static_cast<std::size_t>(e.src)] > 0)
            e.weight /= row[static_cast<std::size_t>(e.src)];
    hcim::Network net(n, std::move(edges));
    net.set_beta_uniform(beta);
    return net;
}

class TempDir {
public:
    TempDir() {
        path_ = std::filesystem::temp_directory_path() /
                ("hcim_test_" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& contents) {
    const std::string p = dir.file(name);
    std::ofstream out(p, std::ios::binary);
    out << contents;
    return p;
}

} // namespace testutil
