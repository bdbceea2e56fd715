// dataset.hpp — labeled datasets in the unit box, loaders and generators.
//
// Features live in [0,1]; labels are 1-based in [1..C]. Datasets loaded from
// 8-bit sources (MNIST, CIFAR-10) additionally keep the raw bytes so distance
// computations can run in exact integer units of 1/255.

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seplab/core.hpp"

namespace seplab {

struct Dataset {
    std::string name;
    std::size_t n = 0;
    std::size_t d = 0;
    int class_count = 0;
    std::vector<double> features;      // row-major n*d
    std::vector<int> labels;           // n entries in [1..class_count]
    std::vector<std::uint8_t> bytes;   // n*d when 8-bit sourced, else empty
    std::map<std::string, std::string> meta;

    bool has_bytes() const { return !bytes.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * d, d};
    }

    std::span<const std::uint8_t> byte_row(std::size_t i) const {
        return {bytes.data() + i * d, d};
    }

    Vector row_vec(std::size_t i) const {
        return Vector(features.begin() + static_cast<std::ptrdiff_t>(i * d),
                      features.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }

    void validate() const {
        if (n < 1) throw InputError("dataset '" + name + "': n must be >= 1");
        if (class_count < 1)
            throw InputError("dataset '" + name + "': class_count must be >= 1");
        if (features.size() != n * d)
            throw InputError("dataset '" + name + "': feature matrix size mismatch");
        if (labels.size() != n)
            throw InputError("dataset '" + name + "': label count mismatch");
        if (!bytes.empty() && bytes.size() != n * d)
            throw InputError("dataset '" + name + "': byte matrix size mismatch");
        for (int y : labels)
            if (y < 1 || y > class_count)
                throw InputError("dataset '" + name + "': label " +
                                 std::to_string(y) + " outside [1.." +
                                 std::to_string(class_count) + "]");
        for (double v : features)
            if (!(v >= 0.0 && v <= 1.0))
                throw InputError("dataset '" + name +
                                 "': feature outside [0,1] (or NaN)");
    }
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(std::string("truncated file while reading ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::vector<std::uint8_t> read_bytes(std::istream& in, std::size_t count,
                                            const char* what) {
    std::vector<std::uint8_t> out(count);
    if (!in.read(reinterpret_cast<char*>(out.data()),
                 static_cast<std::streamsize>(count)))
        throw FormatError(std::string("truncated file while reading ") + what);
    return out;
}

inline void features_from_bytes(Dataset& ds) {
    ds.features.resize(ds.bytes.size());
    for (std::size_t i = 0; i < ds.bytes.size(); ++i)
        ds.features[i] = static_cast<double>(ds.bytes[i]) / 255.0;
}

}  // namespace detail

// MNIST IDX pair: big-endian magic 2051 (images) / 2049 (labels). Digits 0-9
// are shifted to labels 1-10.
inline Dataset load_mnist_idx(const std::string& images_path,
                              const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open images file: " + images_path);
    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw FormatError("cannot open labels file: " + labels_path);

    const std::uint32_t img_magic = detail::read_be32(img, "images magic");
    if (img_magic != 2051)
        throw FormatError("bad images magic " + std::to_string(img_magic) +
                          " (expected 2051) in " + images_path);
    const std::uint32_t n_img = detail::read_be32(img, "image count");
    const std::uint32_t rows = detail::read_be32(img, "row count");
    const std::uint32_t cols = detail::read_be32(img, "column count");

    const std::uint32_t lbl_magic = detail::read_be32(lbl, "labels magic");
    if (lbl_magic != 2049)
        throw FormatError("bad labels magic " + std::to_string(lbl_magic) +
                          " (expected 2049) in " + labels_path);
    const std::uint32_t n_lbl = detail::read_be32(lbl, "label count");
    if (n_img != n_lbl)
        throw FormatError("image count " + std::to_string(n_img) +
                          " does not match label count " + std::to_string(n_lbl));

    Dataset ds;
    ds.name = "mnist";
    ds.n = n_img;
    ds.d = std::size_t(rows) * cols;
    ds.class_count = 10;
    ds.bytes = detail::read_bytes(img, ds.n * ds.d, "pixel data");
    const auto raw_labels = detail::read_bytes(lbl, ds.n, "label data");
    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (raw_labels[i] > 9)
            throw FormatError("label byte " + std::to_string(raw_labels[i]) +
                              " outside 0-9 at record " + std::to_string(i));
        ds.labels[i] = int(raw_labels[i]) + 1;
    }
    detail::features_from_bytes(ds);
    ds.validate();
    return ds;
}

// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 pixels.
inline Dataset load_cifar10_binary(const std::vector<std::string>& batch_paths) {
    if (batch_paths.empty())
        throw InputError("load_cifar10_binary: empty file list");
    constexpr std::size_t kRecord = 3073;
    constexpr std::size_t kPixels = 3072;

    Dataset ds;
    ds.name = "cifar10";
    ds.d = kPixels;
    ds.class_count = 10;
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open batch file: " + path);
        in.seekg(0, std::ios::end);
        const auto size = static_cast<std::size_t>(in.tellg());
        in.seekg(0);
        if (size == 0 || size % kRecord != 0)
            throw FormatError("file length " + std::to_string(size) +
                              " not a multiple of 3073 in " + path);
        const std::size_t records = size / kRecord;
        auto raw = detail::read_bytes(in, size, "batch data");
        for (std::size_t r = 0; r < records; ++r) {
            const std::uint8_t* rec = raw.data() + r * kRecord;
            if (rec[0] > 9)
                throw FormatError("label byte " + std::to_string(rec[0]) +
                                  " outside 0-9 at record " + std::to_string(r) +
                                  " in " + path);
            ds.labels.push_back(int(rec[0]) + 1);
            ds.bytes.insert(ds.bytes.end(), rec + 1, rec + kRecord);
        }
        ds.n += records;
    }
    detail::features_from_bytes(ds);
    ds.validate();
    return ds;
}

struct SpiralParams {
    std::size_t n_per_class = 500;
    double x_range_max = 4.33 * 3.14159265358979323846;
    double noise = 0.75;
    std::uint64_t seed = 0;
};

// Two-arm spiral. Raw points: the positive class (label 1) is
// (-x cos x + u1, -x sin x + u2), the negative class (label 2) is
// (-x cos x + u1, x sin x + u2), with x ~ U[0, x_range_max] and
// u ~ U[0, noise]. Coordinates are then rescaled per axis into [0,1];
// the affine transform is recorded in meta as raw = offset + scale * unit.
inline Dataset gen_spiral(const SpiralParams& p) {
    if (p.n_per_class < 1) throw InputError("gen_spiral: n_per_class must be >= 1");
    if (p.noise < 0.0) throw InputError("gen_spiral: noise must be >= 0");

    Dataset ds;
    ds.name = "spiral";
    ds.n = 2 * p.n_per_class;
    ds.d = 2;
    ds.class_count = 2;
    ds.features.resize(ds.n * 2);
    ds.labels.resize(ds.n);

    RandomStream rng(p.seed);
    std::vector<double> raw(ds.n * 2);
    for (int cls = 0; cls < 2; ++cls) {
        const double sign_y = cls == 0 ? -1.0 : 1.0;  // class 1 flips sin
        for (std::size_t i = 0; i < p.n_per_class; ++i) {
            const double x = rng.uniform(0.0, p.x_range_max);
            const double u1 = p.noise * rng.uniform();
            const double u2 = p.noise * rng.uniform();
            const std::size_t idx = cls * p.n_per_class + i;
            raw[idx * 2] = -x * std::cos(x) + u1;
            raw[idx * 2 + 1] = sign_y * x * std::sin(x) + u2;
            ds.labels[idx] = cls + 1;
        }
    }

    for (int axis = 0; axis < 2; ++axis) {
        double lo = raw[axis], hi = raw[axis];
        for (std::size_t i = 0; i < ds.n; ++i) {
            lo = std::min(lo, raw[i * 2 + axis]);
            hi = std::max(hi, raw[i * 2 + axis]);
        }
        const double scale = hi > lo ? hi - lo : 1.0;
        for (std::size_t i = 0; i < ds.n; ++i)
            ds.features[i * 2 + axis] =
                std::clamp((raw[i * 2 + axis] - lo) / scale, 0.0, 1.0);
        const std::string key = axis == 0 ? "rescale.x" : "rescale.y";
        ds.meta[key + ".offset"] = format_g17(lo);
        ds.meta[key + ".scale"] = format_g17(scale);
    }
    ds.validate();
    return ds;
}

// Axis-aligned uniform cube noise of half-width `spread` around each center,
// clipped to the unit box. Labels follow center order (1-based).
inline Dataset gen_blobs(const std::vector<Vector>& centers, double spread,
                         std::size_t n_per_class, std::uint64_t seed) {
    if (centers.size() < 2) throw InputError("gen_blobs: need >= 2 centers");
    if (spread < 0.0) throw InputError("gen_blobs: spread must be >= 0");
    if (n_per_class < 1) throw InputError("gen_blobs: n_per_class must be >= 1");
    const std::size_t dim = centers[0].size();
    for (const auto& c : centers)
        if (c.size() != dim) throw InputError("gen_blobs: center dimension mismatch");

    Dataset ds;
    ds.name = "blobs";
    ds.n = centers.size() * n_per_class;
    ds.d = dim;
    ds.class_count = static_cast<int>(centers.size());
    ds.features.reserve(ds.n * dim);
    ds.labels.reserve(ds.n);

    RandomStream rng(seed);
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                const double v = centers[c][k] + spread * rng.uniform(-1.0, 1.0);
                ds.features.push_back(std::clamp(v, 0.0, 1.0));
            }
            ds.labels.push_back(static_cast<int>(c) + 1);
        }
    }
    ds.validate();
    return ds;
}

// n rows without replacement. Unstratified keeps the shuffle order; stratified
// preserves class proportions within +-1 (largest-remainder allocation).
inline Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed,
                         bool stratified = false) {
    if (n < 1 || n > ds.n)
        throw InputError("subsample: n must be in [1, " + std::to_string(ds.n) + "]");
    RandomStream rng(seed);

    auto pick = [&rng](std::vector<std::size_t>& pool, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + rng.uniform_int(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
    };

    std::vector<std::size_t> chosen;
    if (!stratified) {
        std::vector<std::size_t> pool(ds.n);
        for (std::size_t i = 0; i < ds.n; ++i) pool[i] = i;
        pick(pool, n);
        chosen = std::move(pool);
    } else {
        std::vector<std::vector<std::size_t>> by_class(ds.class_count);
        for (std::size_t i = 0; i < ds.n; ++i)
            by_class[ds.labels[i] - 1].push_back(i);

        // Largest-remainder quotas; ties broken by class index.
        std::vector<std::size_t> quota(by_class.size(), 0);
        std::vector<std::pair<double, std::size_t>> rema;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            const double exact = double(n) * double(by_class[c].size()) / double(ds.n);
            quota[c] = static_cast<std::size_t>(exact);
            assigned += quota[c];
            rema.emplace_back(exact - double(quota[c]), c);
        }
        std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
            return a.first > b.first;
        });
        for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++quota[rema[k].second];

        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (quota[c] > by_class[c].size())
                throw InputError("subsample: stratified quota exceeds class size");
            pick(by_class[c], quota[c]);
            chosen.insert(chosen.end(), by_class[c].begin(), by_class[c].end());
        }
    }

    Dataset out;
    out.name = ds.name + "/sub" + std::to_string(n);
    out.n = n;
    out.d = ds.d;
    out.class_count = ds.class_count;
    out.meta = ds.meta;
    out.features.resize(n * ds.d);
    out.labels.resize(n);
    if (ds.has_bytes()) out.bytes.resize(n * ds.d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = chosen[i];
        std::copy_n(ds.features.data() + src * ds.d, ds.d,
                    out.features.data() + i * ds.d);
        if (ds.has_bytes())
            std::copy_n(ds.bytes.data() + src * ds.d, ds.d,
                        out.bytes.data() + i * ds.d);
        out.labels[i] = ds.labels[src];
    }
    out.validate();
    return out;
}

// Labels drawn i.i.d. uniform over [1..C]; features untouched.
inline Dataset random_relabel(const Dataset& ds, std::uint64_t seed) {
    Dataset out = ds;
    out.name = ds.name + "/relabel";
    RandomStream rng(seed);
    for (std::size_t i = 0; i < out.n; ++i)
        out.labels[i] =
            static_cast<int>(rng.uniform_int(std::uint64_t(ds.class_count))) + 1;
    return out;
}

// Flat binary dataset cache.
// Layout: magic "SEPLABDS", version byte 1, little-endian u64 n, u64 d,
// u32 C, labels as i32, features as f64. 8-bit provenance is recovered on
// load by checking that every feature equals k/255 exactly.
inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write("SEPLABDS", 8);
    detail::write_le<std::uint8_t>(out, 1);
    detail::write_le<std::uint64_t>(out, ds.n);
    detail::write_le<std::uint64_t>(out, ds.d);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.class_count));
    for (int y : ds.labels) detail::write_le<std::int32_t>(out, y);
    out.write(reinterpret_cast<const char*>(ds.features.data()),
              static_cast<std::streamsize>(ds.features.size() * sizeof(double)));
    if (!out) throw FormatError("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset file: " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, "SEPLABDS", 8) != 0)
        throw FormatError("bad magic in dataset file: " + path);
    const auto version = detail::read_le<std::uint8_t>(in, "version");
    if (version != 1)
        throw FormatError("unsupported dataset version " + std::to_string(version) +
                          " in " + path);
    Dataset ds;
    ds.name = path;
    ds.n = detail::read_le<std::uint64_t>(in, "n");
    ds.d = detail::read_le<std::uint64_t>(in, "d");
    ds.class_count =
        static_cast<int>(detail::read_le<std::uint32_t>(in, "class count"));
    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i)
        ds.labels[i] = detail::read_le<std::int32_t>(in, "label");
    ds.features.resize(ds.n * ds.d);
    if (!in.read(reinterpret_cast<char*>(ds.features.data()),
                 static_cast<std::streamsize>(ds.features.size() * sizeof(double))))
        throw FormatError("truncated dataset file while reading features: " + path);

    bool quantized = true;
    for (double v : ds.features) {
        const double scaled = v * 255.0;
        const double rounded = std::nearbyint(scaled);
        if (rounded < 0.0 || rounded > 255.0 || v != rounded / 255.0) {
            quantized = false;
            break;
        }
    }
    if (quantized) {
        ds.bytes.resize(ds.features.size());
        for (std::size_t i = 0; i < ds.features.size(); ++i)
            ds.bytes[i] =
                static_cast<std::uint8_t>(std::nearbyint(ds.features[i] * 255.0));
    }
    ds.validate();
    return ds;
}

}  // namespace seplab
