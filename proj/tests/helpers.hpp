// Shared fixtures for the test suites.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "seplab/dataset.hpp"
#include "seplab/network.hpp"

namespace testutil {

using seplab::Dataset;
using seplab::RandomStream;
using seplab::Vector;

// Random dataset with features in [0,1] and every class represented.
inline Dataset random_dataset(std::size_t n, std::size_t d, int classes,
                              std::uint64_t seed) {
    Dataset ds;
    ds.name = "random";
    ds.n = n;
    ds.d = d;
    ds.class_count = classes;
    ds.features.resize(n * d);
    ds.labels.resize(n);
    RandomStream rng(seed);
    for (double& v : ds.features) v = rng.uniform();
    for (std::size_t i = 0; i < n; ++i)
        ds.labels[i] = i < static_cast<std::size_t>(classes)
                           ? static_cast<int>(i) + 1
                           : static_cast<int>(rng.uniform_int(classes)) + 1;
    ds.validate();
    return ds;
}

// Same, quantized to exact multiples of 1/255 with the byte matrix attached.
inline Dataset random_byte_dataset(std::size_t n, std::size_t d, int classes,
                                   std::uint64_t seed) {
    Dataset ds = random_dataset(n, d, classes, seed);
    ds.bytes.resize(n * d);
    for (std::size_t i = 0; i < ds.features.size(); ++i) {
        const auto b = static_cast<std::uint8_t>(ds.features[i] * 255.0);
        ds.bytes[i] = b;
        ds.features[i] = static_cast<double>(b) / 255.0;
    }
    return ds;
}

inline Dataset one_d_dataset(const std::vector<double>& xs,
                             const std::vector<int>& ys, int classes) {
    Dataset ds;
    ds.name = "fixture";
    ds.n = xs.size();
    ds.d = 1;
    ds.class_count = classes;
    ds.features = xs;
    ds.labels = ys;
    ds.validate();
    return ds;
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            auto candidate = base / ("seplab_test_" + std::to_string(::getpid()) +
                                     "_" + std::to_string(i));
            if (std::filesystem::create_directory(candidate)) {
                path = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

inline void push_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

// Minimal IDX pair: images are rows x cols, one byte per pixel.
inline void write_idx_pair(const std::string& images_path,
                           const std::string& labels_path,
                           const std::vector<std::vector<unsigned char>>& images,
                           const std::vector<unsigned char>& labels,
                           std::uint32_t rows, std::uint32_t cols) {
    std::vector<unsigned char> img;
    push_be32(img, 2051);
    push_be32(img, static_cast<std::uint32_t>(images.size()));
    push_be32(img, rows);
    push_be32(img, cols);
    for (const auto& image : images) img.insert(img.end(), image.begin(), image.end());
    write_file(images_path, img);

    std::vector<unsigned char> lbl;
    push_be32(lbl, 2049);
    push_be32(lbl, static_cast<std::uint32_t>(labels.size()));
    lbl.insert(lbl.end(), labels.begin(), labels.end());
    write_file(labels_path, lbl);
}

// Network with explicitly given single linear layer (Identity).
inline seplab::Network linear_net(const std::vector<std::vector<double>>& rows,
                                  const Vector& biases) {
    seplab::Network net;
    net.input_dim = rows[0].size();
    net.class_count = static_cast<int>(rows.size());
    seplab::Layer layer;
    layer.in = rows[0].size();
    layer.out = rows.size();
    layer.activation = seplab::Activation::Identity;
    for (const auto& r : rows)
        layer.weights.insert(layer.weights.end(), r.begin(), r.end());
    layer.biases = biases;
    net.layers.push_back(std::move(layer));
    return net;
}

}  // namespace testutil
